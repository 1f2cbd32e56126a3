import functools
import math
import statistics
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Union

import numpy as np
import pandas as pd
from scipy.special import ndtr

from redps.bench.config import ExperimentConfig
from redps.bench.oracles import OracleValue, oracle_iid_sum, oracle_overshoot, oracle_two_tail
from redps.cache.utils import compute_dict_hash, memoize_dict
from redps.dominating.search import DominatingSet, find_dominating_set
from redps.event_sets.base import PolyhedralUnion
from redps.event_sets.builders import halfspace_set, overshoot_set, random_halfspace_union, two_tail_set
from redps.event_sets.parsing import dump_polyhedral_text, load_polyhedral_file, parse_polyhedral_text
from redps.event_sets.split import split_regions
from redps.inference.discrepancy import delta_empirical, theorem1_delta_bound
from redps.inference.efficiency import asym_eff_ratio, berry_esseen_ratio, relative_error, variance_right_tail
from redps.inference.intervals import CiSpec, confidence_interval, coverage_fraction
from redps.rate_models.base import RateModel
from redps.rate_models.gaussian import GaussianModel
from redps.rate_models.increments import NormalMinusExpSumModel
from redps.sampling.estimators import (
    run_alpha_hat,
    run_beta_hat,
    run_crude_mc,
    run_is_estimation,
    run_replications,
)
from redps.sampling.mixture import MixtureSampler
from redps.sampling.report import EstimationReport
from redps.sampling.rng import ordered_map
from redps.schemas import SerializableModel
from redps.utils.exceptions import ConfigError
from redps.utils.logger import logger

CSV_COLUMNS = [
    "experiment",
    "params",
    "estimator",
    "k_used",
    "r_found",
    "stop_reason",
    "n",
    "p_hat",
    "v_n",
    "rel_err",
    "eb_lo",
    "eb_hi",
    "clt_lo",
    "clt_hi",
    "hits_e2",
    "oracle_p",
    "seed_count",
    "wall_time",
]
DELTA_EPSILONS = (0.01, 0.05, 0.1)


class Problem(NamedTuple):
    params: str
    rarity: float
    model: RateModel
    union: PolyhedralUnion
    oracle: Optional[OracleValue]
    n: int


class Cell(NamedTuple):
    problem: Problem
    estimator: str
    k_used: int
    dominating: Optional[DominatingSet]


class ExperimentResult(SerializableModel):
    config_hash: str
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any] = {}
    dominating: Optional[Dict[str, Any]] = None


class DominatingRecord(SerializableModel):
    """Dominating sets of every problem in an experiment, as written by the CLI."""

    experiment: str
    sets: List[Dict[str, Any]]


@memoize_dict(maxsize=32)
def search_dominating(payload: Dict[str, Any]) -> DominatingSet:
    """Dominating-point search keyed by a JSON payload, so k sweeps and seeds reuse one search."""
    model = GaussianModel(payload["mean"], payload["cov"])
    union = parse_polyhedral_text(payload["set_text"])
    return find_dominating_set(model, union, C=payload["C"], max_points=payload["max_points"])


def dominating_for(model: GaussianModel, union: PolyhedralUnion, C: float, max_points: int) -> DominatingSet:
    payload = {
        "mean": model.mean().tolist(),
        "cov": model.cov.tolist(),
        "set_text": dump_polyhedral_text(union),
        "C": C,
        "max_points": max_points,
    }
    return search_dominating(payload)


def _reference_oracle(model: RateModel, union: PolyhedralUnion, config: ExperimentConfig) -> Optional[OracleValue]:
    if not config.reference_n:
        return None
    reference = run_crude_mc(model, union, config.reference_n, config.seeds[0] + 1, workers=config.threads)
    return OracleValue(p_exact=reference.p_hat, method="crude_mc_reference", est_abs_error=reference.std_error)


def _gamma_n(config: ExperimentConfig, gamma: float) -> int:
    if config.n_scale:
        return max(2, int(round(config.n_scale * gamma**2)))
    return config.n


def build_problems(config: ExperimentConfig) -> List[Problem]:
    experiment = config.experiment
    if experiment == "iid_sum":
        problems = []
        for m in config.m:
            model = NormalMinusExpSumModel(m, config.mu_a, config.sigma_a, config.rate_b)
            level = config.a * m
            union = halfspace_set([([1.0], level), ([-1.0], level)], gamma=config.a)
            oracle = oracle_iid_sum(m, config.a, config.mu_a, config.sigma_a, config.rate_b)
            problems.append(Problem(f"m={m};a={config.a}", float(m), model, union, oracle, config.n))
        return problems
    if experiment == "overshoot":
        return [
            Problem(
                f"T={config.T};a={config.a};sigma={sigma}",
                1.0 / sigma,
                GaussianModel.isotropic(config.T, sigma),
                overshoot_set(config.T, config.a),
                oracle_overshoot(config.T, config.a, sigma),
                config.n,
            )
            for sigma in config.sigma
        ]
    if experiment in ("two_tail", "ci_coverage", "delta_sweep"):
        return [
            Problem(
                f"gamma={gamma};k_tail={config.k_tail}",
                gamma,
                GaussianModel([0.0], [[1.0]]),
                two_tail_set(gamma, config.k_tail),
                oracle_two_tail(gamma, config.k_tail),
                _gamma_n(config, gamma),
            )
            for gamma in config.gamma
        ]
    if experiment == "custom_polyhedral":
        union = load_polyhedral_file(config.polyhedral_file)
        if config.mean is not None:
            cov = config.cov if config.cov is not None else (config.sigma[0] ** 2 * np.eye(len(config.mean))).tolist()
            model = GaussianModel(config.mean, cov)
        else:
            model = GaussianModel.isotropic(union.dimension, config.sigma[0])
        if model.dimension != union.dimension:
            raise ConfigError([f"model.mean: dimension {model.dimension} does not match set dimension {union.dimension}"])
        oracle = _reference_oracle(model, union, config)
        return [Problem(f"file={config.polyhedral_file}", 1.0, model, union, oracle, config.n)]
    if experiment == "synthetic_halfspaces":
        rng = np.random.Generator(np.random.Philox(config.set_seed))
        union = random_halfspace_union(config.d, config.count, config.rate_low, config.rate_high, rng)
        model = GaussianModel.isotropic(config.d, 1.0)
        oracle = _reference_oracle(model, union, config)
        params = f"d={config.d};count={config.count};rates=[{config.rate_low},{config.rate_high}]"
        return [Problem(params, 1.0, model, union, oracle, config.n)]
    raise ConfigError([f"experiment: unknown experiment {experiment}"])


def build_cells(config: ExperimentConfig, problems: List[Problem]) -> List[Cell]:
    cells = []
    for problem in problems:
        estimator = config.estimator
        if config.experiment == "iid_sum" or estimator == "crude":
            k_used = {"alpha_hat": 1, "beta_hat": 2}.get(estimator, 0)
            cells.append(Cell(problem, estimator, k_used, None))
            continue
        # coverage runs use every dominating point; is_k sweeps need the full list
        full = estimator == "is_k" or config.experiment == "ci_coverage"
        C = math.inf if full else config.C
        dom = dominating_for(problem.model, problem.union, C, config.max_points)
        ks = config.k if estimator == "is_k" else [dom.k]
        for k in ks:
            if k > dom.k:
                raise ConfigError([f"estimation.k: {k} exceeds the {dom.k} dominating points found"])
            cells.append(Cell(problem, f"is_k{k}" if estimator == "is_k" else "is_all", k, dom))
    return cells


def _estimate(cell: Cell, diagnostics: bool, seed: int) -> EstimationReport:
    problem = cell.problem
    model, union, n = problem.model, problem.union, problem.n
    if cell.estimator == "crude":
        return run_crude_mc(model, union, n, seed, keep_outputs=diagnostics)
    if cell.estimator == "alpha_hat":
        return run_alpha_hat(model, union.gamma, n, seed, keep_outputs=diagnostics)
    if cell.estimator == "beta_hat":
        return run_beta_hat(model, union.gamma, n, seed, keep_outputs=diagnostics)
    dom = cell.dominating.truncate(cell.k_used)
    mix = MixtureSampler.from_dominating_set(model, dom)
    return run_is_estimation(model, union, split_regions(union, dom), mix, n, seed, keep_outputs=diagnostics)


def _cell_reports(config: ExperimentConfig, cell: Cell) -> List[EstimationReport]:
    estimate: Callable[..., EstimationReport] = functools.partial(_estimate, cell, config.diagnostics)
    reports: List[EstimationReport] = []
    for seed in config.seeds:
        if config.replications:
            reports.extend(run_replications(estimate, seed, config.replications, workers=1))
        else:
            reports.append(estimate(seed=seed))
    return reports


def _pooled(reports: List[EstimationReport]) -> EstimationReport:
    pooled = reports[0]
    for report in reports[1:]:
        pooled = pooled.merge(report)
    return pooled


def two_tail_delta_bound(gamma: float, k_tail: float, n: int, epsilon: float) -> float:
    """Discrepancy bound of the single-tilt estimator, splitting the two-tail set into its right and left tails."""
    p1 = float(ndtr(-gamma))
    p2 = float(ndtr(-k_tail * gamma))
    # left tail under the tilted law N(gamma, 1)
    p_tilde_2 = float(ndtr(-(k_tail + 1.0) * gamma))
    return theorem1_delta_bound(variance_right_tail(gamma), n, p1, p2, p1 + p2, p_tilde_2, epsilon)


def _bound_M(report: EstimationReport) -> float:
    return report.lr_bound if report.lr_bound else 1.0


def run_cell(job) -> Dict[str, Any]:
    config, cell, config_hash = job
    problem = cell.problem
    logger.info(f"Running {config.experiment} cell {problem.params} with {cell.estimator}")
    reports = _cell_reports(config, cell)
    pooled = _pooled(reports)
    eb = confidence_interval(pooled, CiSpec(alpha=config.alpha, method="empirical_bernstein", bound_M=_bound_M(pooled)))
    clt = confidence_interval(pooled, CiSpec(alpha=config.alpha, method="clt"))
    oracle_p = problem.oracle.p_exact if problem.oracle else None

    second_moment = pooled.v_n * (pooled.n - 1) / pooled.n + pooled.p_hat**2
    p_ref = oracle_p if oracle_p else pooled.p_hat
    asym_eff = asym_eff_ratio(second_moment, p_ref) if second_moment > 0 and 0 < p_ref < 1 else None

    dom = cell.dominating
    row: Dict[str, Any] = {
        "experiment": config.experiment,
        "params": problem.params,
        "estimator": cell.estimator,
        "k_used": cell.k_used,
        "r_found": dom.k if dom else (2 if config.experiment == "iid_sum" else 0),
        "stop_reason": dom.stop_reason if dom else ("closed_form" if config.experiment == "iid_sum" else "none"),
        "n": problem.n,
        "p_hat": pooled.p_hat,
        "v_n": pooled.v_n,
        "rel_err": relative_error(pooled),
        "eb_lo": eb[0],
        "eb_hi": eb[1],
        "clt_lo": clt[0],
        "clt_hi": clt[1],
        "hits_e2": pooled.hits_e2,
        "oracle_p": oracle_p,
        "seed_count": len(reports),
        "wall_time": pooled.wall_time,
        "rarity": problem.rarity,
        "asym_eff": asym_eff,
        "bound_violations": pooled.bound_violations,
        "config_hash": config_hash,
        "seeds": ",".join(str(seed) for seed in config.seeds),
    }

    if config.replications:
        row["reps_without_e2_hits"] = sum(1 for report in reports if report.hits_e2 == 0)
        if oracle_p:
            row["median_ratio"] = statistics.median(report.p_hat / oracle_p for report in reports)
            p_hats = [report.p_hat for report in reports]
            for epsilon in sorted(set(DELTA_EPSILONS) | {config.epsilon}):
                if len(p_hats) >= math.ceil(1 / epsilon):
                    row[f"delta_{epsilon}"] = delta_empirical(p_hats, oracle_p, epsilon).delta_hat
        if config.experiment == "ci_coverage" and oracle_p:
            row["coverage_eb"] = coverage_fraction(
                [
                    confidence_interval(
                        report,
                        CiSpec(alpha=config.alpha, method="empirical_bernstein", bound_M=_bound_M(report)),
                    )
                    for report in reports
                ],
                oracle_p,
            )
            row["coverage_clt"] = coverage_fraction(
                [confidence_interval(report, CiSpec(alpha=config.alpha, method="clt")) for report in reports],
                oracle_p,
            )
    if config.bound and cell.k_used == 1 and cell.estimator != "crude":
        row["delta_bound"] = two_tail_delta_bound(problem.rarity, config.k_tail, problem.n, config.epsilon)
    if config.diagnostics and pooled.outputs is not None:
        row["be_ratio"] = berry_esseen_ratio(pooled.outputs)

    if pooled.bound_violations:
        logger.warning(f"{pooled.bound_violations} likelihood-ratio bound violations in {problem.params}")
    return row


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """
    Run every (problem, estimator, k) cell of an experiment and collect one row per cell.

    Cells run in a process pool when config.threads > 1; rows keep cell order.
    """
    config_hash = compute_dict_hash(config.dict())
    problems = build_problems(config)
    cells = build_cells(config, problems)
    logger.info(f"Experiment {config.experiment}: {len(cells)} cells, config hash {config_hash[:12]}")
    rows = ordered_map(run_cell, [(config, cell, config_hash) for cell in cells], config.threads)

    dominating = next((cell.dominating for cell in cells if cell.dominating is not None), None)
    summary = {
        "experiment": config.experiment,
        "cells": len(rows),
        "config_hash": config_hash,
        "hits_e2": sum(row["hits_e2"] for row in rows),
        "bound_violations": sum(row["bound_violations"] for row in rows),
    }
    return ExperimentResult(
        config_hash=config_hash,
        rows=rows,
        summary=summary,
        dominating=dominating.to_record() if dominating else None,
    )


def rows_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    """Rows as a DataFrame with the fixed columns first and extra columns after, in first-seen order."""
    extras: List[str] = []
    for row in rows:
        extras.extend(key for key in row if key not in CSV_COLUMNS and key not in extras)
    return pd.DataFrame(rows, columns=CSV_COLUMNS + extras)


def write_csv(rows: List[Dict[str, Any]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows_frame(rows).to_csv(path, index=False, float_format="%.5e")
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path

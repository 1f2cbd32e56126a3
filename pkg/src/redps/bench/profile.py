"""
Efficiency profile over a gamma grid for the two-tail problem.

For each estimator the profile lists the discrepancy estimate, relative error
and log second-moment ratio at every gamma, then flags whether the ratio climbs
towards 2 (asymptotic efficiency) and whether the discrepancy shrinks
(probabilistic efficiency).
"""
import math
from collections import defaultdict
from typing import Any, Dict, List, Optional, Sequence, Tuple

from redps.bench.config import ExperimentConfig
from redps.bench.experiments import run_experiment
from redps.inference.efficiency import log_second_moment_exact_two_tail
from redps.schemas import SerializableModel
from redps.utils.exceptions import ConfigError
from redps.utils.logger import logger

PROFILE_EXPERIMENTS = ("two_tail", "delta_sweep")
PROFILE_ESTIMATORS = ("crude", "is_k", "is_all")
MIN_GRID_POINTS = 3
# final log-moment ratio an AE-consistent estimator must exceed on the grid
AE_FLOOR = 1.5


class ProfilePoint(SerializableModel):
    gamma: float
    n: int
    p_exact: float
    delta_hat: float
    rel_err: Optional[float] = None
    asym_eff: Optional[float] = None


class EstimatorProfile(SerializableModel):
    estimator: str
    points: List[ProfilePoint]
    ae_consistent: bool
    pe_consistent: bool


class EfficiencyProfile(SerializableModel):
    epsilon: float
    k_tail: Optional[float] = None
    estimators: List[EstimatorProfile]


def _asym_eff(row: Dict[str, Any], k_tail: Optional[float]) -> Optional[float]:
    p = row["oracle_p"]
    if row["estimator"] == "crude":
        # E(Z^2) = p for an indicator
        return 1.0
    if row["estimator"] == "is_k1" and k_tail is not None and k_tail > 1:
        return log_second_moment_exact_two_tail(row["rarity"], k_tail) / math.log(p)
    return row.get("asym_eff")


def _is_increasing(values: Sequence[float]) -> bool:
    return all(later > earlier for earlier, later in zip(values, values[1:]))


def report_efficiency_profile(
    rows: List[Dict[str, Any]], epsilon: float, k_tail: Optional[float] = None
) -> EfficiencyProfile:
    """
    Summarize replicated two-tail rows by estimator.

    AE-consistent: the second-moment ratio increases along the grid and ends above AE_FLOOR.
    PE-consistent: the discrepancy at the largest gamma is below both 1 and its value at the smallest gamma,
    or is zero throughout.
    """
    key = f"delta_{epsilon}"
    grouped: Dict[str, List[Dict[str, Any]]] = defaultdict(list)
    for row in rows:
        grouped[row["estimator"]].append(row)

    profiles = []
    for estimator, estimator_rows in grouped.items():
        gammas = {row["rarity"] for row in estimator_rows}
        if len(gammas) < MIN_GRID_POINTS:
            raise ConfigError([f"set.gamma: efficiency profile needs at least {MIN_GRID_POINTS} grid points"])
        points = []
        for row in sorted(estimator_rows, key=lambda r: r["rarity"]):
            if not row.get("oracle_p") or key not in row:
                raise ConfigError(
                    [f"estimation.replications: {estimator} at {row['params']} has no discrepancy at epsilon={epsilon}"]
                )
            points.append(
                ProfilePoint(
                    gamma=row["rarity"],
                    n=row["n"],
                    p_exact=row["oracle_p"],
                    delta_hat=row[key],
                    rel_err=row["rel_err"],
                    asym_eff=_asym_eff(row, k_tail),
                )
            )
        ratios = [point.asym_eff for point in points]
        ae = None not in ratios and _is_increasing(ratios) and ratios[-1] > AE_FLOOR
        deltas = [point.delta_hat for point in points]
        pe = max(deltas) == 0 or (deltas[-1] < 1 and deltas[-1] < deltas[0])
        logger.info(f"{estimator}: AE-consistent={ae} PE-consistent={pe}")
        profiles.append(EstimatorProfile(estimator=estimator, points=points, ae_consistent=ae, pe_consistent=pe))
    return EfficiencyProfile(epsilon=epsilon, k_tail=k_tail, estimators=profiles)


def run_efficiency_profile(
    config: ExperimentConfig, estimators: Sequence[str] = PROFILE_ESTIMATORS
) -> Tuple[List[Dict[str, Any]], EfficiencyProfile]:
    """Run each estimator over the config's gamma grid (is_k with a single tilt) and profile the rows."""
    if config.experiment not in PROFILE_EXPERIMENTS:
        raise ConfigError([f"experiment: profile runs on {PROFILE_EXPERIMENTS}, got {config.experiment}"])
    if config.replications < math.ceil(1 / config.epsilon):
        raise ConfigError(["estimation.replications: too few replications for the requested epsilon"])
    rows: List[Dict[str, Any]] = []
    for estimator in estimators:
        update = {"estimator": estimator, "k": [1] if estimator == "is_k" else config.k}
        rows.extend(run_experiment(config.copy(update=update)).rows)
    return rows, report_efficiency_profile(rows, config.epsilon, config.k_tail)

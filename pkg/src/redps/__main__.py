from contextlib import contextmanager
from pathlib import Path
from typing import Any, Optional

import numpy as np
import typer
from dotenv import load_dotenv
from pydantic import ValidationError
from rich import box
from rich import print as rprint
from rich.panel import Panel
from rich.table import Table

from redps.bench.config import ExperimentConfig, load_experiment_config
from redps.bench.experiments import DominatingRecord, build_problems, dominating_for, run_experiment, write_csv
from redps.bench.oracles import oracle_iid_sum, oracle_overshoot, oracle_two_tail
from redps.bench.profile import EfficiencyProfile, run_efficiency_profile
from redps.dominating.verify import verify_dominating_set
from redps.rate_models.gaussian import GaussianModel
from redps.sampling.rng import chunk_generator
from redps.schemas import SerializableModel
from redps.settings import settings
from redps.utils.exceptions import (
    ConfigError,
    MaxPointsError,
    QpIterationError,
    QuadratureError,
    TiltSolveError,
    VacuousBoundError,
)
from redps.utils.logger import configure, logger

app = typer.Typer(help="Rare-event probability estimation with dominating-point importance sampling.")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VACUOUS = 4


def setup(env_file: Optional[Path], log_level: str, log_file: Optional[Path], settings_file: Optional[str]):
    """Load environment variables, configure logging and apply a settings file."""
    if env_file:
        load_dotenv(env_file)
    configure(log_level=log_level, log_file=log_file)
    if settings_file:
        settings.update_from_yaml(settings_file)


@contextmanager
def exit_on_error():
    """Translate library errors into the documented exit codes."""
    try:
        yield
    except ConfigError as exc:
        for error in exc.errors:
            rprint(f"[red]config error:[/red] {error}")
        raise typer.Exit(EXIT_CONFIG) from exc
    except ValidationError as exc:
        rprint(f"[red]config error:[/red] {exc}")
        raise typer.Exit(EXIT_CONFIG) from exc
    except (QpIterationError, TiltSolveError, QuadratureError, MaxPointsError) as exc:
        logger.error(exc)
        rprint(f"[red]numerical failure:[/red] {exc}")
        raise typer.Exit(EXIT_NUMERICAL) from exc
    except VacuousBoundError as exc:
        rprint(f"[yellow]vacuous bound:[/yellow] {exc}")
        raise typer.Exit(EXIT_VACUOUS) from exc


def experiment_config(config: Optional[str], **overrides: Any) -> ExperimentConfig:
    return load_experiment_config(config, overrides)


def print_rows(title: str, rows, columns):
    table = Table(title=title, box=box.SIMPLE)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*[_format(row.get(column)) for column in columns])
    rprint(table)


def _format(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.5e}"
    return str(value)


def write_json(record: SerializableModel, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record.json(indent=2))
    logger.info(f"Wrote {path}")


@app.command()
def dominating(
    config: Optional[str] = typer.Option(None, help="Path to an experiment file (YAML or JSON)."),
    experiment: Optional[str] = typer.Option(None, help="Experiment whose set is searched."),
    a: Optional[float] = typer.Option(None, "--a", help="Threshold level of the set."),
    T: Optional[int] = typer.Option(None, "--T", help="Random-walk horizon."),
    sigma: Optional[str] = typer.Option(None, help="Step standard deviation(s), comma separated."),
    gamma: Optional[str] = typer.Option(None, help="Two-tail level(s), comma separated."),
    k_tail: Optional[float] = typer.Option(None, "--k-tail", help="Left-tail multiplier."),
    C: Optional[float] = typer.Option(None, "--C", help="Stopping threshold on the rate ratio."),
    max_points: Optional[int] = typer.Option(None, "--max-points", help="Cap on dominating points."),
    verify: int = typer.Option(0, help="Probe points per piece for the cover check (0 skips it)."),
    seed: Optional[int] = typer.Option(None, help="Seed for the cover check."),
    out: Optional[Path] = typer.Option(None, help="Write the dominating set record as JSON."),
    env_file: Optional[Path] = typer.Option(None, help="Path to a .env file."),
    settings_file: Optional[str] = typer.Option(None, help="Numerical settings YAML."),
    log_level: str = typer.Option("warning", help="Logging level."),
    log_file: Optional[Path] = typer.Option(None, help="Path to the log file."),
):
    """
    Compute and print the dominating set of each problem in the experiment.
    """
    setup(env_file, log_level, log_file, settings_file)
    with exit_on_error():
        cfg = experiment_config(
            config,
            experiment=experiment,
            a=a,
            T=T,
            sigma=sigma,
            gamma=gamma,
            k_tail=k_tail,
            C=C,
            max_points=max_points,
            seeds=seed,
        )
        records = []
        for problem in build_problems(cfg):
            if not isinstance(problem.model, GaussianModel):
                raise ConfigError([f"experiment: {cfg.experiment} has closed-form tilts, no search is run"])
            dom = dominating_for(problem.model, problem.union, cfg.C, cfg.max_points)
            record = {"params": problem.params, **dom.to_record()}
            if verify:
                if not dom.exhausted:
                    raise ConfigError(["estimation.C: the cover check needs an exhausted search (use --C inf)"])
                rng = chunk_generator(cfg.seeds[0], 0, stream=3)
                record["verification"] = verify_dominating_set(
                    dom, problem.union, verify, rng, model=problem.model
                ).dict()
            records.append(record)
            rprint(
                Panel(
                    f"k = {dom.k}  stop_reason = {dom.stop_reason}\n"
                    f"rates = {np.array2string(dom.rates, precision=6)}",
                    title=problem.params,
                    box=box.ROUNDED,
                    expand=False,
                )
            )
        if out:
            write_json(DominatingRecord(experiment=cfg.experiment, sets=records), out)


@app.command()
def run(
    config: Optional[str] = typer.Option(None, help="Path to an experiment file (YAML or JSON)."),
    experiment: Optional[str] = typer.Option(None, help="Experiment to run."),
    estimator: Optional[str] = typer.Option(None, help="crude, is_k, is_all, alpha_hat or beta_hat."),
    m: Optional[str] = typer.Option(None, "--m", help="Number of increments (single, list or range)."),
    a: Optional[float] = typer.Option(None, "--a", help="Threshold level of the set."),
    T: Optional[int] = typer.Option(None, "--T", help="Random-walk horizon."),
    sigma: Optional[str] = typer.Option(None, help="Step standard deviation(s), comma separated."),
    gamma: Optional[str] = typer.Option(None, help="Two-tail level(s), comma separated."),
    k_tail: Optional[float] = typer.Option(None, "--k-tail", help="Left-tail multiplier."),
    seed: Optional[str] = typer.Option(None, help="Seed or comma separated seeds."),
    n: Optional[int] = typer.Option(None, "--n", help="Samples per estimate."),
    k: Optional[str] = typer.Option(None, "--k", help="Mixture sizes for is_k (single, list or range)."),
    C: Optional[float] = typer.Option(None, "--C", help="Stopping threshold on the rate ratio."),
    alpha: Optional[float] = typer.Option(None, help="Confidence interval level."),
    replications: Optional[int] = typer.Option(None, help="Independent replications per cell."),
    bound: bool = typer.Option(False, help="Attach the discrepancy bound to single-tilt two-tail rows."),
    out: Optional[Path] = typer.Option(None, help="CSV output path."),
    threads: Optional[int] = typer.Option(None, help="Worker processes (-1 uses every core)."),
    env_file: Optional[Path] = typer.Option(None, help="Path to a .env file."),
    settings_file: Optional[str] = typer.Option(None, help="Numerical settings YAML."),
    log_level: str = typer.Option("warning", help="Logging level."),
    log_file: Optional[Path] = typer.Option(None, help="Path to the log file."),
):
    """
    Run an experiment and write one CSV row per cell.
    """
    setup(env_file, log_level, log_file, settings_file)
    with exit_on_error():
        cfg = experiment_config(
            config,
            experiment=experiment,
            estimator=estimator,
            m=m,
            a=a,
            T=T,
            sigma=sigma,
            gamma=gamma,
            k_tail=k_tail,
            seeds=seed,
            n=n,
            k=k,
            C=C,
            alpha=alpha,
            replications=replications,
            bound=bound or None,
            output=str(out) if out else None,
            threads=threads,
        )
        result = run_experiment(cfg)
        print_rows(
            f"{cfg.experiment} ({result.config_hash[:12]})",
            result.rows,
            ["params", "estimator", "k_used", "n", "p_hat", "rel_err", "eb_lo", "eb_hi", "oracle_p", "hits_e2"],
        )
        if cfg.output:
            write_csv(result.rows, cfg.output)
        rprint(result.summary)


@app.command()
def oracle(
    experiment: str = typer.Option(..., help="two_tail, iid_sum or overshoot."),
    m: int = typer.Option(10, "--m", help="Number of increments."),
    a: Optional[float] = typer.Option(None, "--a", help="Threshold level."),
    T: int = typer.Option(10, "--T", help="Random-walk horizon."),
    sigma: float = typer.Option(0.2, help="Step standard deviation."),
    gamma: float = typer.Option(4.0, help="Two-tail level."),
    k_tail: float = typer.Option(2.0, "--k-tail", help="Left-tail multiplier."),
    log_level: str = typer.Option("warning", help="Logging level."),
):
    """
    Print the reference probability of one problem.
    """
    setup(None, log_level, None, None)
    with exit_on_error():
        if experiment == "two_tail":
            value = oracle_two_tail(gamma, k_tail)
        elif experiment == "iid_sum":
            value = oracle_iid_sum(m, a if a is not None else 1.5)
        elif experiment == "overshoot":
            value = oracle_overshoot(T, a if a is not None else 3.3, sigma)
        else:
            raise ConfigError([f"experiment: no oracle for {experiment}"])
        rprint(value.dict())


@app.command()
def profile(
    config: Optional[str] = typer.Option(None, help="Path to an experiment file (YAML or JSON)."),
    gamma: Optional[str] = typer.Option(None, help="Gamma grid, comma separated (at least 3 points)."),
    k_tail: Optional[float] = typer.Option(None, "--k-tail", help="Left-tail multiplier."),
    n_scale: Optional[int] = typer.Option(None, "--n-scale", help="Use n = n_scale * gamma^2 samples."),
    n: Optional[int] = typer.Option(None, "--n", help="Samples per estimate when n_scale is unset."),
    seed: Optional[str] = typer.Option(None, help="Seed or comma separated seeds."),
    replications: Optional[int] = typer.Option(None, help="Replications per grid point."),
    epsilon: Optional[float] = typer.Option(None, help="Discrepancy level."),
    out: Optional[Path] = typer.Option(None, help="CSV output path for the profile rows."),
    threads: Optional[int] = typer.Option(None, help="Worker processes (-1 uses every core)."),
    env_file: Optional[Path] = typer.Option(None, help="Path to a .env file."),
    settings_file: Optional[str] = typer.Option(None, help="Numerical settings YAML."),
    log_level: str = typer.Option("warning", help="Logging level."),
    log_file: Optional[Path] = typer.Option(None, help="Path to the log file."),
):
    """
    Profile crude, single-tilt and full-mixture estimators over a gamma grid of two-tail problems.
    """
    setup(env_file, log_level, log_file, settings_file)
    with exit_on_error():
        cfg = experiment_config(
            config,
            experiment="two_tail" if config is None else None,
            gamma=gamma,
            k_tail=k_tail,
            n_scale=n_scale,
            n=n,
            seeds=seed,
            replications=replications,
            epsilon=epsilon,
            output=str(out) if out else None,
            threads=threads,
        )
        rows, result = run_efficiency_profile(cfg)
        print_profile(result)
        if cfg.output:
            write_csv(rows, cfg.output)


def print_profile(result: EfficiencyProfile):
    table = Table(title=f"efficiency profile (epsilon={result.epsilon})", box=box.SIMPLE)
    for column in ("estimator", "gamma", "n", "delta_hat", "rel_err", "asym_eff", "AE", "PE"):
        table.add_column(column)
    for estimator in result.estimators:
        for point in estimator.points:
            table.add_row(
                estimator.estimator,
                f"{point.gamma:g}",
                str(point.n),
                _format(point.delta_hat),
                _format(point.rel_err),
                _format(point.asym_eff),
                "yes" if estimator.ae_consistent else "no",
                "yes" if estimator.pe_consistent else "no",
            )
    rprint(table)


def main():
    app()


if __name__ == "__main__":
    main()

import math
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ValidationError, root_validator, validator

from redps.settings import settings
from redps.utils.exceptions import ConfigError
from redps.utils.util import flatten_sections, load_file_into_dict, parse_float_list, parse_k_spec

EXPERIMENTS = (
    "iid_sum",
    "overshoot",
    "two_tail",
    "custom_polyhedral",
    "ci_coverage",
    "delta_sweep",
    "synthetic_halfspaces",
)
ESTIMATORS = ("crude", "is_k", "is_all", "alpha_hat", "beta_hat")

# section each field is read from, used to report field paths
FIELD_SECTIONS = {
    "m": "model",
    "mu_a": "model",
    "sigma_a": "model",
    "rate_b": "model",
    "sigma": "model",
    "mean": "model",
    "cov": "model",
    "d": "model",
    "a": "set",
    "T": "set",
    "gamma": "set",
    "k_tail": "set",
    "polyhedral_file": "set",
    "count": "set",
    "rate_low": "set",
    "rate_high": "set",
    "set_seed": "set",
    "estimator": "estimation",
    "k": "estimation",
    "n": "estimation",
    "n_scale": "estimation",
    "seeds": "estimation",
    "C": "estimation",
    "alpha": "estimation",
    "replications": "estimation",
    "epsilon": "estimation",
    "max_points": "estimation",
    "reference_n": "estimation",
    "diagnostics": "estimation",
    "bound": "estimation",
    "output": "output",
    "threads": "output",
}

DEFAULT_A = {"iid_sum": 1.5, "overshoot": 3.3}
DEFAULT_N = {"iid_sum": 1_000_000}


class ExperimentConfig(BaseModel):
    experiment: str
    estimator: str = "is_all"
    k: List[int] = []
    # defaults per experiment, see DEFAULT_N
    n: Optional[int] = None
    # n(gamma) = n_scale * gamma^2 for gamma sweeps when set
    n_scale: Optional[int] = None
    seeds: List[int] = [0]
    C: float = settings.default_C
    alpha: float = settings.default_alpha
    replications: int = 0
    epsilon: float = 0.05
    max_points: int = settings.max_points
    reference_n: int = 0
    diagnostics: bool = False
    # attach the split-estimator discrepancy bound to single-tilt two-tail rows
    bound: bool = False

    # iid_sum
    m: List[int] = [10]
    mu_a: float = 1.5
    sigma_a: float = 1.0
    rate_b: float = 1.0
    # overshoot, two_tail, custom_polyhedral
    a: Optional[float] = None
    T: int = 10
    sigma: List[float] = [0.2]
    gamma: List[float] = [4.0]
    k_tail: float = 2.0
    mean: Optional[List[float]] = None
    cov: Optional[List[List[float]]] = None
    polyhedral_file: Optional[str] = None
    # synthetic_halfspaces
    d: int = 20
    count: int = 60
    rate_low: float = 2.0
    rate_high: float = 6.0
    set_seed: int = 0

    output: Optional[str] = None
    threads: int = 1

    class Config:
        extra = "forbid"
        validate_assignment = True

    @validator("experiment")
    def validate_experiment(cls, v):
        if v not in EXPERIMENTS:
            raise ValueError(f"must be one of {EXPERIMENTS}")
        return v

    @validator("estimator")
    def validate_estimator(cls, v):
        if v not in ESTIMATORS:
            raise ValueError(f"must be one of {ESTIMATORS}")
        return v

    @validator("k", "m", pre=True)
    def parse_int_spec(cls, v):
        return parse_k_spec(v)

    @validator("sigma", "gamma", pre=True)
    def parse_float_spec(cls, v):
        return parse_float_list(v)

    @validator("seeds", pre=True)
    def parse_seeds(cls, v):
        if isinstance(v, int):
            return [v]
        if isinstance(v, str):
            return [int(s) for s in v.split(",") if s.strip()]
        return v

    @validator("seeds")
    def validate_seeds(cls, v):
        if not v:
            raise ValueError("at least one seed is required")
        if any(s < 0 or s >= 2**64 for s in v):
            raise ValueError("seeds must be unsigned 64-bit integers")
        return v

    @validator("n")
    def validate_n(cls, v):
        if v is not None and v < 2:
            raise ValueError("must be at least 2")
        return v

    @validator("C")
    def validate_C(cls, v):
        if not v > 1:
            raise ValueError("must be greater than 1")
        return v

    @validator("alpha", "epsilon")
    def validate_unit_interval(cls, v):
        if not 0 < v < 1:
            raise ValueError("must lie in (0, 1)")
        return v

    @validator("sigma", "gamma", each_item=True)
    def validate_positive_items(cls, v):
        if not v > 0:
            raise ValueError("must be positive")
        return v

    @validator("replications", "reference_n")
    def validate_nonnegative(cls, v):
        if v < 0:
            raise ValueError("must be nonnegative")
        return v

    @root_validator(skip_on_failure=True)
    def validate_experiment_parameters(cls, values):
        experiment = values["experiment"]
        estimator = values["estimator"]
        if values.get("a") is None:
            values["a"] = DEFAULT_A.get(experiment, 1.0)
        if values["a"] <= 0:
            raise ValueError("set.a: must be positive")
        if values.get("n") is None:
            values["n"] = DEFAULT_N.get(experiment, 100_000)

        if experiment == "iid_sum":
            if estimator not in ("alpha_hat", "beta_hat", "crude"):
                raise ValueError("estimation.estimator: iid_sum supports alpha_hat, beta_hat and crude")
        elif estimator in ("alpha_hat", "beta_hat"):
            raise ValueError(f"estimation.estimator: {estimator} is only defined for iid_sum")

        if estimator == "is_k" and not values["k"]:
            raise ValueError("estimation.k: required for estimator is_k")
        if experiment in ("two_tail", "ci_coverage", "delta_sweep"):
            if values["k_tail"] < 1:
                raise ValueError("set.k_tail: must be at least 1")
            if estimator == "is_k" and max(values["k"]) > 2:
                raise ValueError("estimation.k: two-tail sets have two dominating points")
        if experiment in ("ci_coverage", "delta_sweep") and values["replications"] < 1:
            raise ValueError(f"estimation.replications: required for {experiment}")
        if experiment == "delta_sweep" and values["replications"] < math.ceil(1 / values["epsilon"]):
            raise ValueError("estimation.replications: too few replications for the requested epsilon")
        if experiment == "custom_polyhedral":
            if not values.get("polyhedral_file"):
                raise ValueError("set.polyhedral_file: required for custom_polyhedral")
            if values.get("cov") is not None and values.get("mean") is None:
                raise ValueError("model.mean: required when model.cov is given")
        if experiment == "synthetic_halfspaces" and not 0 < values["rate_low"] <= values["rate_high"]:
            raise ValueError("set.rate_low: need 0 < rate_low <= rate_high")
        if values["bound"] and experiment not in ("two_tail", "ci_coverage", "delta_sweep"):
            raise ValueError("estimation.bound: only defined for two-tail experiments")
        if experiment == "overshoot" and not 1 <= values["T"] <= 50:
            raise ValueError("set.T: must lie in [1, 50]")
        return values


def _field_path(loc) -> str:
    name = str(loc[0]) if loc else "config"
    if name == "__root__":
        return "config"
    section = FIELD_SECTIONS.get(name)
    path = ".".join(str(part) for part in loc)
    return f"{section}.{path}" if section else path


def build_config(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate a flat mapping, turning pydantic errors into a ConfigError with field paths."""
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        errors = []
        for error in exc.errors():
            path = _field_path(error["loc"])
            message = error["msg"]
            errors.append(message if path == "config" else f"{path}: {message}")
        raise ConfigError(errors) from exc
    except ValueError as exc:
        raise ConfigError([str(exc)]) from exc


def load_experiment_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read a YAML/JSON experiment file (sections model/set/estimation/output are flattened); overrides win."""
    data: Dict[str, Any] = {}
    if path:
        try:
            data = flatten_sections(load_file_into_dict(path))
        except (FileNotFoundError, ValueError) as exc:
            raise ConfigError([f"config: {exc}"]) from exc
        polyhedral_file = data.get("polyhedral_file")
        if polyhedral_file and not Path(polyhedral_file).is_absolute():
            data["polyhedral_file"] = str(Path(path).parent / polyhedral_file)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return build_config(data)

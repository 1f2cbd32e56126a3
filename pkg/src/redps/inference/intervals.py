import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, root_validator, validator
from scipy.special import ndtri

from redps.sampling.report import EstimationReport

METHODS = ("empirical_bernstein", "clt")


class CiSpec(BaseModel):
    alpha: float = 0.05
    method: str = "clt"
    # per-sample upper bound of the outputs, needed by the Bernstein interval
    bound_M: Optional[float] = None

    @validator("alpha")
    def validate_alpha(cls, v):
        if not 0 < v < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {v}")
        return v

    @validator("method")
    def validate_method(cls, v):
        if v not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {v}")
        return v

    @root_validator(skip_on_failure=True)
    def validate_bound(cls, values):
        if values["method"] == "empirical_bernstein":
            bound = values.get("bound_M")
            if bound is None or not bound > 0:
                raise ValueError("bound_M must be positive for the empirical Bernstein interval")
        return values


def _check_alpha(alpha: float):
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _check_n(n: int):
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")


def z_quantile(alpha: float) -> float:
    """Two-sided standard normal quantile z_{1 - alpha/2}."""
    _check_alpha(alpha)
    return float(ndtri(1.0 - alpha / 2.0))


def eb_halfwidth(v_n: float, n: int, alpha: float, bound_M: float) -> float:
    """
    Empirical Bernstein half-width for outputs in [0, bound_M]:
    sqrt(2 v_n log(4/alpha) / n) + 7 log(4/alpha) bound_M / (3 (n - 1)).
    """
    _check_alpha(alpha)
    _check_n(n)
    if v_n < 0:
        raise ValueError("v_n must be nonnegative")
    log_term = math.log(4.0 / alpha)
    return math.sqrt(2.0 * v_n * log_term / n) + 7.0 * log_term * bound_M / (3.0 * (n - 1))


def clt_halfwidth(v_n: float, n: int, alpha: float) -> float:
    _check_n(n)
    if v_n < 0:
        raise ValueError("v_n must be nonnegative")
    return z_quantile(alpha) * math.sqrt(v_n / n)


def confidence_interval(report: EstimationReport, spec: CiSpec) -> Tuple[float, float]:
    """Two-sided interval around p_hat; the lower end is clipped at zero."""
    if spec.method == "clt":
        half = clt_halfwidth(report.v_n, report.n, spec.alpha)
    else:
        half = eb_halfwidth(report.v_n, report.n, spec.alpha, spec.bound_M)
    return max(report.p_hat - half, 0.0), report.p_hat + half


def coverage_fraction(intervals: Sequence[Tuple[float, float]], true_p: float) -> float:
    if not intervals:
        raise ValueError("No intervals given")
    bounds = np.asarray(intervals, dtype=float)
    return float(np.mean((bounds[:, 0] <= true_p) & (true_p <= bounds[:, 1])))

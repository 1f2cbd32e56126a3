import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, validator

from redps.utils.exceptions import VacuousBoundError


class DiscrepancyEstimate(BaseModel):
    epsilon: float
    delta_hat: float
    replications: int
    true_p: float

    @validator("epsilon")
    def validate_epsilon(cls, v):
        if not 0 < v < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {v}")
        return v


def delta_empirical(p_hats: Sequence[float], true_p: float, epsilon: float) -> DiscrepancyEstimate:
    """Empirical (1 - epsilon)-quantile of |p_hat - p| / p, taken at the higher order statistic."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if true_p <= 0:
        raise ValueError("true_p must be positive")
    p_hats = np.asarray(p_hats, dtype=float)
    minimum = math.ceil(1.0 / epsilon)
    if p_hats.size < minimum:
        raise ValueError(f"epsilon={epsilon} needs at least {minimum} replications, got {p_hats.size}")
    relative = np.abs(p_hats - true_p) / true_p
    delta_hat = float(np.quantile(relative, 1.0 - epsilon, method="higher"))
    return DiscrepancyEstimate(epsilon=epsilon, delta_hat=delta_hat, replications=p_hats.size, true_p=true_p)


def chebyshev_delta_bound(variance: float, n: int, p: float, epsilon: float) -> float:
    """sqrt(Var(Z) / (n p^2 epsilon)), the Chebyshev bound on the discrepancy."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.sqrt(variance / (n * p**2 * epsilon))


def theorem1_delta_bound(
    var_z1: float,
    n: int,
    p1: float,
    p2: float,
    p: float,
    p_tilde_2: float,
    epsilon: float,
) -> float:
    """
    Discrepancy bound for an estimator split over E1 and E2:
    sqrt(Var(Z1) / (n p1^2 (epsilon - n p_tilde_2))) + p2 / p.

    Raises:
        VacuousBoundError: If epsilon <= n * p_tilde_2.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if p1 <= 0 or p <= 0:
        raise ValueError("p1 and p must be positive")
    n_p_tilde_2 = n * p_tilde_2
    if epsilon <= n_p_tilde_2:
        raise VacuousBoundError(epsilon, n_p_tilde_2)
    return math.sqrt(var_z1 / (n * p1**2 * (epsilon - n_p_tilde_2))) + p2 / p


def theorem2_limit_gap(p1: float, p: float) -> float:
    """Weak-efficiency gap 1 - p1 / p left by the uncovered part of the set."""
    if p <= 0:
        raise ValueError("p must be positive")
    return 1.0 - p1 / p

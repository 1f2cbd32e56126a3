import math
from typing import Optional

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr

from redps.sampling.report import EstimationReport


def relative_error(report: EstimationReport) -> Optional[float]:
    """sqrt(v_n) / p_hat, or None when p_hat is zero and the ratio is undefined."""
    if report.p_hat <= 0:
        return None
    return math.sqrt(report.v_n) / report.p_hat


def asym_eff_ratio(second_moment: float, p: float) -> float:
    """log E(Z^2) / log p; asymptotically efficient estimators approach 2."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not second_moment > 0:
        raise ValueError(f"second_moment must be positive, got {second_moment}")
    return math.log(second_moment) / math.log(p)


def log_second_moment_exact_two_tail(gamma: float, k_tail: float) -> float:
    """
    Log second moment of the single-tilt estimator of P(X >= gamma or X <= -k_tail gamma)
    for X ~ N(0, 1) sampled from N(gamma, 1).

    With L(x) = exp(-gamma x + gamma^2 / 2), E(Z^2) = E[I_E(X) L(X)] under N(0, 1),
    and completing the square turns it into
    exp(gamma^2) (Phibar(2 gamma) + Phibar((k_tail - 1) gamma)).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if k_tail <= 1:
        raise ValueError("k_tail must exceed 1")
    tails = np.array([log_ndtr(-2.0 * gamma), log_ndtr(-(k_tail - 1.0) * gamma)])
    return gamma**2 + float(logsumexp(tails))


def second_moment_exact_two_tail(gamma: float, k_tail: float) -> float:
    return math.exp(log_second_moment_exact_two_tail(gamma, k_tail))


def second_moment_exact_right_tail(gamma: float) -> float:
    """E(Z_1^2) for the right-tail part Z_1 = I{X >= gamma} L(X) of the same estimator."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return math.exp(gamma**2 + float(log_ndtr(-2.0 * gamma)))


def variance_right_tail(gamma: float) -> float:
    p1 = float(ndtr(-gamma))
    return second_moment_exact_right_tail(gamma) - p1**2


def variance_upper_bound(min_alpha: float, rate_1: float) -> float:
    if not 0 < min_alpha <= 1:
        raise ValueError("min_alpha must lie in (0, 1]")
    if rate_1 < 0:
        raise ValueError("rate_1 must be nonnegative")
    return math.exp(-2.0 * rate_1) / min_alpha**2


def berry_esseen_ratio(outputs) -> Optional[float]:
    """Plug-in E|Z - p_hat|^3 / (sqrt(n) V^{3/2}); None when the outputs have no spread."""
    outputs = np.asarray(outputs, dtype=float)
    n = outputs.size
    if n < 2:
        raise ValueError("Need at least two outputs")
    centered = outputs - outputs.mean()
    variance = float(centered @ centered) / (n - 1)
    if variance <= 0:
        return None
    third = float(np.mean(np.abs(centered) ** 3))
    return third / (math.sqrt(n) * variance**1.5)

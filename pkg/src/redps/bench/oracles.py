"""
Independent reference values for the benchmark problems.

Each oracle returns an OracleValue carrying the probability and an estimate of
its absolute error. Values are memoized in LRU caches keyed by the arguments.
"""
import math
from typing import Callable

import numpy as np
from cachetools import LRUCache, cached
from pydantic import validator
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import log_ndtr, ndtr
from scipy.stats import gamma as gamma_dist
from scipy.stats import norm

from redps.schemas import SerializableModel
from redps.settings import settings
from redps.utils.exceptions import QuadratureError
from redps.utils.logger import logger

ORACLE_METHODS = ("closed_form_tail", "gamma_normal_quadrature", "walk_recursion", "crude_mc_reference")

oracle_cache: LRUCache = LRUCache(maxsize=256)


class OracleValue(SerializableModel):
    p_exact: float
    method: str
    est_abs_error: float

    @validator("method")
    def validate_method(cls, v):
        if v not in ORACLE_METHODS:
            raise ValueError(f"Unknown oracle method {v}")
        return v

    @property
    def relative_error(self) -> float:
        return self.est_abs_error / self.p_exact if self.p_exact > 0 else math.inf


@cached(cache=oracle_cache, key=lambda gamma, k_tail: ("two_tail", gamma, k_tail))
def oracle_two_tail(gamma: float, k_tail: float) -> OracleValue:
    """Phibar(gamma) + Phibar(k_tail gamma) for X ~ N(0, 1)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if k_tail < 1:
        raise ValueError("k_tail must be at least 1")
    p = float(ndtr(-gamma) + ndtr(-k_tail * gamma))
    return OracleValue(p_exact=p, method="closed_form_tail", est_abs_error=4 * np.finfo(float).eps * p)


def _integrate_log_scaled(log_integrand: Callable[[float], float], upper: float, rtol: float):
    """
    Integrate exp(log_integrand) over (0, inf).

    The integrand is rescaled by its peak value and the range is split at the
    peak; quad limits grow until the reported error meets rtol.
    """
    peak = minimize_scalar(lambda g: -log_integrand(g), bounds=(1e-12, upper), method="bounded").x
    log_peak = log_integrand(peak)

    def scaled(g):
        return math.exp(log_integrand(g) - log_peak) if g > 0 else 0.0

    error_ratio = math.inf
    for limit in (200, 800, 3200):
        left, left_err = quad(scaled, 0.0, peak, limit=limit, epsabs=0.0, epsrel=rtol / 10)
        right, right_err = quad(scaled, peak, math.inf, limit=limit, epsabs=0.0, epsrel=rtol / 10)
        value = left + right
        error_ratio = (left_err + right_err) / value if value > 0 else math.inf
        if error_ratio <= rtol:
            scale = math.exp(log_peak)
            return value * scale, (left_err + right_err) * scale
    raise QuadratureError("Gamma-normal quadrature did not reach the requested accuracy", error_ratio)


@cached(
    cache=oracle_cache,
    key=lambda m, a, mu_a=1.5, sigma_a=1.0, rate_b=1.0: ("iid_sum", m, a, mu_a, sigma_a, rate_b),
)
def oracle_iid_sum(m: int, a: float, mu_a: float = 1.5, sigma_a: float = 1.0, rate_b: float = 1.0) -> OracleValue:
    """
    P(|S_m| >= a m) for S_m = N_m - G_m with N_m ~ N(m mu_a, m sigma_a^2), G_m ~ Gamma(m, 1 / rate_b).

    Conditioning on G_m leaves normal tails, integrated against the gamma density.
    """
    if m < 1 or a <= 0:
        raise ValueError("m must be positive and a must be positive")
    scale = sigma_a * math.sqrt(m)
    density = gamma_dist(m, scale=1.0 / rate_b)
    level = a * m
    center = mu_a * m

    def log_right(g):
        return float(density.logpdf(g) + log_ndtr(-(level - center + g) / scale))

    def log_left(g):
        return float(density.logpdf(g) + log_ndtr((-level - center + g) / scale))

    upper = (m + 10 * math.sqrt(m) + 10) / rate_b + level + abs(center) + 10 * scale
    rtol = settings.oracle_rtol
    right, right_err = _integrate_log_scaled(log_right, upper, rtol)
    left, left_err = _integrate_log_scaled(log_left, upper, rtol)
    p = right + left
    logger.debug(f"iid_sum oracle m={m}: right={right:.6e} left={left:.6e}")
    return OracleValue(p_exact=p, method="gamma_normal_quadrature", est_abs_error=right_err + left_err)


def _walk_trapezoid(T: int, a: float, sigma: float, points: int) -> float:
    """
    Sum over m of P(S_1..S_{m-1} < a, S_m >= a) with the sub-threshold densities
    of S_m propagated on a uniform grid by the trapezoid rule.
    """
    lower = -8.0 * sigma * math.sqrt(T)
    grid = np.linspace(lower, a, points + 1)
    step = grid[1] - grid[0]
    weights = np.full(grid.size, step)
    weights[0] = weights[-1] = step / 2
    kernel = norm.pdf(grid[:, None] - grid[None, :], scale=sigma) * weights[None, :]
    crossing = ndtr(-(a - grid) / sigma) * weights

    density = norm.pdf(grid, scale=sigma)
    p = float(ndtr(-a / sigma))
    for _ in range(2, T + 1):
        p += float(crossing @ density)
        density = kernel @ density
    return p


@cached(cache=oracle_cache, key=lambda T, a, sigma: ("overshoot", T, a, sigma))
def oracle_overshoot(T: int, a: float, sigma: float) -> OracleValue:
    """P(max_{m <= T} S_m >= a) for a Gaussian random walk with N(0, sigma^2) steps."""
    if not 1 <= T <= 50:
        raise ValueError("T must lie in [1, 50]")
    if sigma <= 0 or a <= 0:
        raise ValueError("sigma and a must be positive")
    if T == 1:
        p = float(ndtr(-a / sigma))
        return OracleValue(p_exact=p, method="walk_recursion", est_abs_error=4 * np.finfo(float).eps * p)

    rtol = settings.overshoot_rtol
    points = 200
    coarse = _walk_trapezoid(T, a, sigma, points)
    previous = None
    error_ratio = math.inf
    while points < 3200:
        points *= 2
        fine = _walk_trapezoid(T, a, sigma, points)
        # trapezoid error is O(h^2) on smooth integrands
        extrapolated = (4.0 * fine - coarse) / 3.0
        if previous is not None:
            error = abs(extrapolated - previous)
            error_ratio = error / extrapolated
            if error_ratio <= rtol:
                return OracleValue(p_exact=extrapolated, method="walk_recursion", est_abs_error=error)
        previous, coarse = extrapolated, fine
    raise QuadratureError(f"Walk recursion grid exhausted at {points} points", error_ratio)

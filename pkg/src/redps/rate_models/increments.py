import math
from typing import Optional

import numpy as np

from redps.rate_models.base import RateModel
from redps.settings import settings
from redps.utils.exceptions import OutOfDomainError, TiltSolveError
from redps.utils.logger import logger


class NormalMinusExpSumModel(RateModel):
    """
    Sum S_m of m i.i.d. increments A - B with A ~ N(mu_a, sigma_a^2) and B ~ Exp(rate_b).

    Per increment, mu1(t) = mu_a t + sigma_a^2 t^2 / 2 - log(1 + t / rate_b) on
    t > -rate_b. The model is one-dimensional in S_m, so cgf(t) = m * mu1(t) and
    rate(y) = m * I1(y / m).
    """

    dimension = 1

    def __init__(self, m: int, mu_a: float = 1.5, sigma_a: float = 1.0, rate_b: float = 1.0):
        if m < 1:
            raise ValueError("m must be a positive integer")
        if sigma_a <= 0 or rate_b <= 0:
            raise ValueError("sigma_a and rate_b must be positive")
        self.m = int(m)
        self.mu_a = float(mu_a)
        self.sigma_a = float(sigma_a)
        self.rate_b = float(rate_b)

    # per-increment quantities

    def _check_domain(self, theta: float) -> float:
        bound = -self.rate_b + settings.domain_margin
        if not theta > bound:
            raise OutOfDomainError(theta, bound)
        return theta

    def increment_cgf(self, theta: float) -> float:
        theta = self._check_domain(float(theta))
        return self.mu_a * theta + 0.5 * self.sigma_a**2 * theta**2 - math.log1p(theta / self.rate_b)

    def increment_cgf_grad(self, theta: float) -> float:
        theta = self._check_domain(float(theta))
        return self.mu_a + self.sigma_a**2 * theta - 1.0 / (self.rate_b + theta)

    def increment_cgf_hessian(self, theta: float) -> float:
        theta = self._check_domain(float(theta))
        return self.sigma_a**2 + 1.0 / (self.rate_b + theta) ** 2

    def increment_tilt(self, level: float) -> float:
        """Solve mu1'(t) = level with safeguarded Newton; mu1' is strictly increasing."""
        tol = settings.tol_newton * (1.0 + abs(level))
        # bracket strictly inside the domain guard
        lo = -self.rate_b + 2.0 * settings.domain_margin
        if self.increment_cgf_grad(lo) >= level:
            raise TiltSolveError(lo, self.increment_cgf_grad(lo) - level, 0)
        hi = max(1.0, abs(level))
        while self.increment_cgf_grad(hi) <= level:
            hi *= 2.0
        theta = min(max(0.0, lo), hi)
        residual = math.inf
        for iteration in range(settings.newton_max_iter):
            gap = self.increment_cgf_grad(theta) - level
            residual = abs(gap)
            if residual <= tol:
                return theta
            if gap > 0:
                hi = theta
            else:
                lo = theta
            step = theta - gap / self.increment_cgf_hessian(theta)
            # fall back to bisection when Newton leaves the bracket
            theta = step if lo < step < hi else 0.5 * (lo + hi)
        logger.debug(f"Tilt solve stalled at theta={theta} with residual {residual:.3e}")
        raise TiltSolveError(theta, residual, settings.newton_max_iter)

    def increment_rate(self, level: float) -> float:
        theta = self.increment_tilt(level)
        return theta * level - self.increment_cgf(theta)

    # RateModel interface on S_m

    def cgf(self, x) -> float:
        theta = self._as_vector(x)[0]
        return self.m * self.increment_cgf(theta)

    def cgf_grad(self, x) -> np.ndarray:
        theta = self._as_vector(x)[0]
        return np.array([self.m * self.increment_cgf_grad(theta)])

    def cgf_hessian(self, x) -> np.ndarray:
        theta = self._as_vector(x)[0]
        return np.array([[self.m * self.increment_cgf_hessian(theta)]])

    def tilt_param(self, y) -> np.ndarray:
        level = self._as_vector(y)[0] / self.m
        return np.array([self.increment_tilt(level)])

    def sample_tilted(self, s, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        theta = self._check_domain(float(self._as_vector(s)[0]))
        count = 1 if size is None else size
        # sums of m tilted increments: normal part stays normal, exponential part becomes gamma
        normal_part = rng.normal(self.m * (self.mu_a + self.sigma_a**2 * theta), self.sigma_a * math.sqrt(self.m), count)
        gamma_part = rng.gamma(self.m, 1.0 / (self.rate_b + theta), count)
        draws = (normal_part - gamma_part)[:, None]
        return draws[0] if size is None else draws

    def with_m(self, m: int) -> "NormalMinusExpSumModel":
        return NormalMinusExpSumModel(m, self.mu_a, self.sigma_a, self.rate_b)

    def __repr__(self):
        return (
            f"NormalMinusExpSumModel(m={self.m}, mu_a={self.mu_a}, sigma_a={self.sigma_a}, rate_b={self.rate_b})"
        )

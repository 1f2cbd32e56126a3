import abc
from typing import Optional

import numpy as np

from redps.settings import settings
from redps.utils.exceptions import TiltSolveError


class RateModel(abc.ABC):
    """
    Abstract input law for large-deviations importance sampling.

    A rate model exposes the cumulant generating function mu(x) = log E exp(x^T X),
    its gradient, the rate function I(y) (Legendre transform of mu), the tilt
    parameter s_y solving grad mu(s_y) = y and draws from the exponentially
    tilted law with density proportional to exp(s^T x - mu(s)) f(x).

    Instances are immutable after construction and safe to share across workers.
    """

    dimension: int

    @abc.abstractmethod
    def cgf(self, x) -> float:
        """
        Evaluate mu(x).

        Raises:
            OutOfDomainError: If x lies outside the domain of mu.
        """

    @abc.abstractmethod
    def cgf_grad(self, x) -> np.ndarray:
        """Gradient of mu at an interior point x."""

    @abc.abstractmethod
    def cgf_hessian(self, x) -> np.ndarray:
        """Hessian of mu at an interior point x."""

    @abc.abstractmethod
    def tilt_param(self, y) -> np.ndarray:
        """
        Return s_y with grad mu(s_y) = y.

        Raises:
            TiltSolveError: If the solve does not converge.
        """

    @abc.abstractmethod
    def sample_tilted(self, s, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """
        Draw from the law tilted by s.

        Returns a vector of shape (dimension,) when size is None, otherwise an
        array of shape (size, dimension).
        """

    def rate(self, y) -> float:
        """I(y) = s_y^T y - mu(s_y)."""
        y = self._as_vector(y)
        s = self.tilt_param(y)
        return float(s @ y - self.cgf(s))

    def mean(self) -> np.ndarray:
        return self.cgf_grad(np.zeros(self.dimension))

    def log_lr_single(self, s, x) -> np.ndarray:
        """
        Log likelihood ratio -(s^T x - mu(s)) of the single-tilt change of measure.

        Accepts one point of shape (dimension,) or a batch of shape (n, dimension).
        """
        s = self._as_vector(s)
        x = np.asarray(x, dtype=float)
        mu_s = self.cgf(s)
        return -(x @ s - mu_s)

    def _as_vector(self, x) -> np.ndarray:
        vec = np.atleast_1d(np.asarray(x, dtype=float))
        if vec.shape != (self.dimension,):
            raise ValueError(f"Expected a vector of dimension {self.dimension}, got shape {vec.shape}")
        return vec

    def newton_tilt(self, y, s0=None, tol: Optional[float] = None, max_iter: Optional[int] = None) -> np.ndarray:
        """Plain multivariate Newton iteration on grad mu(s) = y."""
        y = self._as_vector(y)
        tol = settings.tol_newton if tol is None else tol
        max_iter = settings.newton_max_iter if max_iter is None else max_iter
        s = np.zeros(self.dimension) if s0 is None else self._as_vector(s0).copy()
        threshold = tol * (1.0 + np.linalg.norm(y))
        residual = np.inf
        for _ in range(max_iter):
            gap = self.cgf_grad(s) - y
            residual = float(np.linalg.norm(gap))
            if residual <= threshold:
                return s
            s = s - np.linalg.solve(self.cgf_hessian(s), gap)
        gap = self.cgf_grad(s) - y
        residual = float(np.linalg.norm(gap))
        if residual <= threshold:
            return s
        raise TiltSolveError(s, residual, max_iter)

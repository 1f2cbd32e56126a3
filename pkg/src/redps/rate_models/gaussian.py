from typing import Optional

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from redps.rate_models.base import RateModel


class GaussianModel(RateModel):
    """
    Multivariate normal input N(mean, cov).

    mu(x) = mean^T x + x^T cov x / 2, I(y) = (y - mean)^T cov^{-1} (y - mean) / 2
    and s_y = cov^{-1} (y - mean). The covariance is held through its lower
    Cholesky factor; its inverse is never formed.
    """

    def __init__(self, mean, cov):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov must have shape {(mean.size, mean.size)}, got {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("cov must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("cov must be positive definite") from exc
        self.dimension = mean.size
        self._mean = mean
        self._cov = cov
        self._chol = chol
        self._mean.setflags(write=False)
        self._cov.setflags(write=False)
        self._chol.setflags(write=False)

    @classmethod
    def isotropic(cls, dimension: int, sigma: float = 1.0, mean=None) -> "GaussianModel":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        center = np.zeros(dimension) if mean is None else mean
        return cls(center, sigma**2 * np.eye(dimension))

    @property
    def cov(self) -> np.ndarray:
        return self._cov

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    def mean(self) -> np.ndarray:
        return self._mean

    def cgf(self, x) -> float:
        x = self._as_vector(x)
        return float(self._mean @ x + 0.5 * x @ self._cov @ x)

    def cgf_grad(self, x) -> np.ndarray:
        x = self._as_vector(x)
        return self._mean + self._cov @ x

    def cgf_hessian(self, x) -> np.ndarray:
        return self._cov

    def cov_solve(self, v) -> np.ndarray:
        """cov^{-1} v through the Cholesky factor."""
        return cho_solve((self._chol, True), np.asarray(v, dtype=float))

    def whiten(self, x) -> np.ndarray:
        """L^{-1} (x - mean) for one point or a batch of rows."""
        x = np.asarray(x, dtype=float)
        centered = (x - self._mean).T
        return solve_triangular(self._chol, centered, lower=True).T

    def rate(self, y) -> float:
        z = self.whiten(self._as_vector(y))
        return float(0.5 * z @ z)

    def tilt_param(self, y) -> np.ndarray:
        y = self._as_vector(y)
        return self.cov_solve(y - self._mean)

    def sample_tilted(self, s, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        center = self.cgf_grad(s)
        if size is None:
            return center + self._chol @ rng.standard_normal(self.dimension)
        z = rng.standard_normal((size, self.dimension))
        return center + z @ self._chol.T

    def __repr__(self):
        return f"GaussianModel(dimension={self.dimension})"

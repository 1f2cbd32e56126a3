import math
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from redps.rate_models.base import RateModel

if TYPE_CHECKING:
    from redps.dominating.search import DominatingSet


class MixtureSampler:
    """
    Mixture of exponentially tilted laws sum_i alpha_i exp(s_i^T x - mu(s_i)) f(x).

    Components are (s_i, a_i) pairs, a_i being the dominating point whose tilt is
    s_i. Likelihood ratios are evaluated in the log domain.
    """

    def __init__(
        self,
        model: RateModel,
        components: Sequence[Tuple[np.ndarray, np.ndarray]],
        weights: Optional[Sequence[float]] = None,
    ):
        if not components:
            raise ValueError("A mixture needs at least one component")
        self.model = model
        self.tilts = np.vstack([np.asarray(s, dtype=float) for s, _ in components])
        self.points = np.vstack([np.asarray(a, dtype=float) for _, a in components])
        k = len(components)
        weights = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (k,):
            raise ValueError(f"Expected {k} weights, got shape {weights.shape}")
        if np.any(weights <= 0):
            raise ValueError("Mixture weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"Mixture weights must sum to 1, got {weights.sum()!r}")
        self.weights = weights
        self.log_weights = np.log(weights)
        self.cgf_values = np.array([model.cgf(s) for s in self.tilts])

    @classmethod
    def from_dominating_set(
        cls,
        model: RateModel,
        dom: "DominatingSet",
        k: Optional[int] = None,
        weights: Optional[Sequence[float]] = None,
    ) -> "MixtureSampler":
        k = dom.k if k is None else k
        if not 1 <= k <= dom.k:
            raise ValueError(f"k must lie in [1, {dom.k}], got {k}")
        return cls(model, [(point.tilt, point.point) for point in dom.points[:k]], weights)

    @property
    def k(self) -> int:
        return self.tilts.shape[0]

    @property
    def component_rates(self) -> np.ndarray:
        """I(a_i) = s_i^T a_i - mu(s_i)."""
        return np.einsum("ij,ij->i", self.tilts, self.points) - self.cgf_values

    @property
    def min_weight(self) -> float:
        return float(self.weights.min())

    def log_lr_bound(self) -> float:
        return -math.log(self.min_weight) - float(self.component_rates.min())

    def lr_bound(self) -> float:
        """Upper bound (1 / min alpha_i) exp(-min_i I(a_i)) of the likelihood ratio on the covered region."""
        return math.exp(self.log_lr_bound())

    def sample_mixture(
        self, rng: np.random.Generator, size: Optional[int] = None
    ) -> Tuple[np.ndarray, Union[int, np.ndarray]]:
        if size is None:
            component = int(rng.choice(self.k, p=self.weights))
            return self.model.sample_tilted(self.tilts[component], rng), component
        components = rng.choice(self.k, size=size, p=self.weights)
        draws = np.empty((size, self.model.dimension))
        for i in range(self.k):
            mask = components == i
            count = int(mask.sum())
            if count:
                draws[mask] = self.model.sample_tilted(self.tilts[i], rng, count)
        return draws, components

    def log_likelihood_ratio(self, x) -> Union[float, np.ndarray]:
        """log L(x) = -logsumexp_i(log alpha_i + s_i^T x - mu(s_i)) for one point or a batch of rows."""
        x = np.asarray(x, dtype=float)
        exponents = x @ self.tilts.T - self.cgf_values + self.log_weights
        result = -logsumexp(exponents, axis=-1)
        return float(result) if x.ndim == 1 else result

    def __repr__(self):
        return f"MixtureSampler(k={self.k}, model={self.model!r})"


def sample_mixture(mix: MixtureSampler, rng: np.random.Generator):
    return mix.sample_mixture(rng)


def log_likelihood_ratio(mix: MixtureSampler, x):
    return mix.log_likelihood_ratio(x)

from typing import TYPE_CHECKING, List, Sequence, Tuple

import numpy as np

from redps.event_sets.base import PolyhedralUnion
from redps.settings import settings

if TYPE_CHECKING:
    from redps.dominating.search import DominatingSet


class RegionSplit:
    """
    Partition of E induced by retained dominating points.

    E1 = E intersected with the union of the half-spaces s_i^T (x - a_i) >= 0,
    E2 = E minus E1. Both classifiers are built from one cover test, so they
    partition E exactly. Cut rows are kept at unit norm and tested with the
    settings.tol_member slack, so each a_i itself lies in E1.
    """

    def __init__(self, base: PolyhedralUnion, cut_points: Sequence[Tuple[np.ndarray, np.ndarray]]):
        self.base = base
        self.cut_points: List[Tuple[np.ndarray, np.ndarray]] = [
            (np.asarray(a, dtype=float), np.asarray(s, dtype=float)) for a, s in cut_points
        ]
        if self.cut_points:
            tilts = np.vstack([s for _, s in self.cut_points])
            self._tilts = tilts / np.linalg.norm(tilts, axis=1)[:, None]
            self._levels = np.einsum("ij,ij->i", self._tilts, np.vstack([a for a, _ in self.cut_points]))
        else:
            self._tilts = np.zeros((0, base.dimension))
            self._levels = np.zeros(0)

    def covered(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.cut_points:
            return np.zeros(x.shape[:-1], dtype=bool) if x.ndim > 1 else np.bool_(False)
        return np.any(x @ self._tilts.T - self._levels >= -settings.tol_member, axis=-1)

    def in_e1(self, x) -> np.ndarray:
        return np.logical_and(self.base.contains(x), self.covered(x))

    def in_e2(self, x) -> np.ndarray:
        return np.logical_and(self.base.contains(x), np.logical_not(self.covered(x)))


def split_regions(union: PolyhedralUnion, dom: "DominatingSet") -> RegionSplit:
    if dom.k < 1:
        raise ValueError("Splitting needs at least one dominating point")
    return RegionSplit(union, [(point.point, point.tilt) for point in dom.points])

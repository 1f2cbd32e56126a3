from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from redps.settings import settings

_UNIT_TOL = 4 * np.finfo(float).eps


def normalize_rows(weights: np.ndarray, offsets: np.ndarray):
    """Scale each row (w, b) so that ||w||_2 = 1; rows already at unit norm are left untouched."""
    norms = np.linalg.norm(weights, axis=1)
    if np.any(norms == 0):
        raise ValueError("Constraint rows must have a nonzero normal vector")
    scale = np.where(np.abs(norms - 1.0) <= _UNIT_TOL, 1.0, norms)
    return weights / scale[:, None], offsets / scale


class Polyhedron:
    """Closed convex polyhedron {x : w_j^T x >= b_j for every row j}, rows normalized to unit length."""

    def __init__(self, weights, offsets, normalize: bool = True):
        weights = np.atleast_2d(np.asarray(weights, dtype=float))
        offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
        if weights.shape[0] < 1:
            raise ValueError("A polyhedron needs at least one row")
        if offsets.shape != (weights.shape[0],):
            raise ValueError(f"Expected {weights.shape[0]} offsets, got shape {offsets.shape}")
        if normalize:
            weights, offsets = normalize_rows(weights, offsets)
        self.weights = weights
        self.offsets = offsets
        self.weights.setflags(write=False)
        self.offsets.setflags(write=False)

    @classmethod
    def from_rows(cls, rows: Sequence) -> "Polyhedron":
        """Build from a sequence of (w, b) pairs."""
        weights = [np.asarray(w, dtype=float) for w, _ in rows]
        offsets = [float(b) for _, b in rows]
        return cls(np.vstack(weights), np.asarray(offsets))

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    @property
    def n_rows(self) -> int:
        return self.weights.shape[0]

    def rows(self):
        return list(zip(self.weights, self.offsets))

    def normalized(self) -> "Polyhedron":
        return Polyhedron(self.weights, self.offsets, normalize=True)

    def slack(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.weights.T - self.offsets

    def contains(self, x, tol: Optional[float] = None) -> np.ndarray:
        tol = settings.tol_member if tol is None else tol
        return np.all(self.slack(x) >= -tol, axis=-1)

    def is_feasible(self) -> bool:
        finite = np.isfinite(self.offsets)
        if not finite.any():
            return True
        result = linprog(
            np.zeros(self.dimension),
            A_ub=-self.weights[finite],
            b_ub=-self.offsets[finite],
            bounds=[(None, None)] * self.dimension,
            method="highs",
        )
        return result.status == 0

    def __repr__(self):
        return f"Polyhedron(rows={self.n_rows}, dimension={self.dimension})"


class PolyhedralUnion:
    """
    Rare-event set given as a finite union of closed convex polyhedra.

    Membership is OR over pieces of AND over rows, with slack tolerance
    settings.tol_member so that boundary points (dominating points lie on
    boundaries) count as inside.
    """

    def __init__(self, pieces: List[Polyhedron], gamma: Optional[float] = None, require_nonempty: bool = True):
        if not pieces:
            raise ValueError("A polyhedral union needs at least one piece")
        dims = {piece.dimension for piece in pieces}
        if len(dims) != 1:
            raise ValueError(f"All pieces must share one dimension, got {sorted(dims)}")
        self.pieces = list(pieces)
        self.gamma = gamma
        if require_nonempty and not any(piece.is_feasible() for piece in self.pieces):
            raise ValueError("Polyhedral union is empty")

    @property
    def dimension(self) -> int:
        return self.pieces[0].dimension

    def __len__(self):
        return len(self.pieces)

    def contains(self, x, tol: Optional[float] = None):
        """Membership for one point (returns bool) or a batch of rows (returns a boolean array)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(f"Point dimension {x.shape[-1]} does not match set dimension {self.dimension}")
        inside = self.pieces[0].contains(x, tol)
        for piece in self.pieces[1:]:
            inside = inside | piece.contains(x, tol)
        if x.ndim == 1:
            return bool(inside)
        return inside

    def __repr__(self):
        return f"PolyhedralUnion(pieces={len(self.pieces)}, dimension={self.dimension}, gamma={self.gamma})"

import math
from typing import Sequence, Tuple

import numpy as np

from redps.event_sets.base import PolyhedralUnion, Polyhedron


def overshoot_set(T: int, a: float) -> PolyhedralUnion:
    """Union over m of the half-spaces {x in R^T : x_1 + ... + x_m >= a}."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if a <= 0:
        raise ValueError("a must be positive")
    pieces = []
    for m in range(1, T + 1):
        w = np.zeros(T)
        w[:m] = 1.0 / math.sqrt(m)
        pieces.append(Polyhedron(w[None, :], np.array([a / math.sqrt(m)]), normalize=False))
    return PolyhedralUnion(pieces, gamma=a)


def two_tail_set(gamma: float, k_tail: float) -> PolyhedralUnion:
    """{x >= gamma} union {x <= -k_tail * gamma} on the real line."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if k_tail < 1:
        raise ValueError("k_tail must be at least 1")
    right = Polyhedron([[1.0]], [gamma])
    left = Polyhedron([[-1.0]], [k_tail * gamma])
    return PolyhedralUnion([right, left], gamma=gamma)


def halfspace_set(rows: Sequence[Tuple[Sequence[float], float]], gamma=None) -> PolyhedralUnion:
    """Union of single-row pieces, one per (w, b) half-space."""
    return PolyhedralUnion([Polyhedron.from_rows([row]) for row in rows], gamma=gamma)


def whole_space(d: int) -> PolyhedralUnion:
    w = np.zeros((1, d))
    w[0, 0] = 1.0
    return PolyhedralUnion([Polyhedron(w, np.array([-np.inf]), normalize=False)])


def empty_set(d: int) -> PolyhedralUnion:
    w = np.zeros((2, d))
    w[0, 0], w[1, 0] = 1.0, -1.0
    return PolyhedralUnion([Polyhedron(w, np.array([1.0, 0.0]), normalize=False)], require_nonempty=False)


def random_halfspace_union(
    d: int,
    count: int,
    rate_low: float,
    rate_high: float,
    rng: np.random.Generator,
) -> PolyhedralUnion:
    """
    Union of random half-spaces {u^T x >= b} with unit normals u.

    Under N(0, I) the closest point of such a half-space is b u with rate b^2 / 2,
    so offsets b = sqrt(2 I) with I uniform over [rate_low, rate_high].
    """
    if count < 1 or d < 1:
        raise ValueError("d and count must be positive")
    if not 0 < rate_low <= rate_high:
        raise ValueError("Need 0 < rate_low <= rate_high")
    normals = rng.standard_normal((count, d))
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    rates = rng.uniform(rate_low, rate_high, count)
    offsets = np.sqrt(2.0 * rates)
    pieces = [Polyhedron(normals[i][None, :], offsets[i : i + 1]) for i in range(count)]
    return PolyhedralUnion(pieces, gamma=math.sqrt(2.0 * rate_low))

from typing import List, Optional

import numpy as np
from scipy.optimize import linprog

from redps.dominating.qp import min_rate_point
from redps.dominating.search import DominatingSet
from redps.event_sets.base import PolyhedralUnion, Polyhedron
from redps.rate_models.gaussian import GaussianModel
from redps.schemas import SerializableModel
from redps.utils.logger import logger


class VerificationReport(SerializableModel):
    n_probe: int
    counterexample_count: int
    counterexamples: List[List[float]]
    unique_cover_counts: List[int]
    redundant_points: List[int]
    cover_holds: bool
    box_centers: List[List[float]] = []
    skipped_pieces: List[int] = []


def _interior_point(piece: Polyhedron, center: np.ndarray, radius: float) -> Optional[np.ndarray]:
    """Chebyshev center of the piece intersected with the box center +- radius."""
    d = piece.dimension
    finite = np.isfinite(piece.offsets)
    W, b = piece.weights[finite], piece.offsets[finite]
    eye = np.eye(d)
    # variables (x, t): maximize t subject to W x - t >= b and |x_i - center_i| + t <= radius
    A_ub = np.vstack(
        [
            np.hstack([-W, np.ones((W.shape[0], 1))]),
            np.hstack([eye, np.ones((d, 1))]),
            np.hstack([-eye, np.ones((d, 1))]),
        ]
    )
    b_ub = np.concatenate([-b, center + radius, radius - center])
    objective = np.zeros(d + 1)
    objective[-1] = -1.0
    result = linprog(objective, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * (d + 1), method="highs")
    if result.status != 0 or result.x[-1] <= 1e-12:
        return None
    return result.x[:d]


def hit_and_run(
    piece: Polyhedron,
    start: np.ndarray,
    center: np.ndarray,
    radius: float,
    n: int,
    rng: np.random.Generator,
    chains: int = 64,
    burn_in: int = 50,
) -> np.ndarray:
    """Approximately uniform draws from the piece intersected with a box, from parallel hit-and-run chains."""
    d = piece.dimension
    finite = np.isfinite(piece.offsets)
    box = np.vstack([np.eye(d), -np.eye(d)])
    W = np.vstack([piece.weights[finite], box])
    b = np.concatenate([piece.offsets[finite], center - radius, -(center + radius)])

    chains = max(1, min(chains, n))
    steps = burn_in + -(-n // chains)
    X = np.tile(start, (chains, 1))
    draws = []
    for step in range(steps):
        directions = rng.standard_normal((chains, d))
        directions /= np.linalg.norm(directions, axis=1)[:, None]
        slack = np.maximum(X @ W.T - b, 0.0)
        rates = directions @ W.T
        with np.errstate(divide="ignore", invalid="ignore"):
            bounds = -slack / rates
        lower = np.where(rates > 0, bounds, -np.inf).max(axis=1)
        upper = np.where(rates < 0, bounds, np.inf).min(axis=1)
        t = rng.uniform(lower, upper)
        X = X + t[:, None] * directions
        if step >= burn_in:
            draws.append(X.copy())
    return np.vstack(draws)[:n]


def verify_dominating_set(
    dom: DominatingSet,
    union: PolyhedralUnion,
    n_probe: int,
    rng: np.random.Generator,
    box_scale: float = 3.0,
    cover_tol: float = 1e-6,
    model: Optional[GaussianModel] = None,
) -> VerificationReport:
    """
    Probe E for points outside every half-space s_i^T (x - a_i) >= 0.

    Probes are spread evenly over the pieces. Each piece is sampled inside a
    box around its minimum-rate point under the model (standard normal when no
    model is given), sized by that point's distance from the mean. A probe
    covered by exactly one half-space counts towards that point's unique-cover
    count, and points that never cover a probe alone are reported as redundant.
    """
    if not dom.exhausted:
        raise ValueError("Only a dominating set that claims to cover the whole set can be verified")
    if dom.k == 0:
        raise ValueError("The dominating set is empty")

    d = union.dimension
    if model is None:
        model = GaussianModel.isotropic(d)
    mean = model.mean()
    tilts = np.vstack([point.tilt for point in dom.points])
    tilts = tilts / np.linalg.norm(tilts, axis=1)[:, None]
    levels = np.einsum("ij,ij->i", tilts, np.vstack([point.point for point in dom.points]))

    per_piece = -(-n_probe // len(union.pieces))
    probes = []
    centers = []
    skipped = []
    for index, piece in enumerate(union.pieces):
        anchor = min_rate_point(mean, model.chol, piece)
        if not anchor.optimal:
            skipped.append(index)
            continue
        center = anchor.x_star
        radius = box_scale * max(1.0, float(np.linalg.norm(center - mean)))
        start = _interior_point(piece, center, radius)
        if start is None:
            logger.warning(f"Piece {index} has no interior inside the probe box; skipping")
            skipped.append(index)
            continue
        centers.append(center.tolist())
        probes.append(hit_and_run(piece, start, center, radius, per_piece, rng))
    if not probes:
        raise ValueError("No piece could be probed")
    probes = np.vstack(probes)[:n_probe]
    probes = probes[union.contains(probes)]

    scores = probes @ tilts.T - levels
    covering = scores >= -cover_tol
    missed = ~covering.any(axis=1)
    unique = covering.sum(axis=1) == 1
    unique_counts = np.bincount(np.argmax(covering[unique], axis=1), minlength=dom.k)
    redundant = [int(i) for i in np.flatnonzero(unique_counts == 0)]

    if missed.any():
        logger.warning(f"Dominating set misses {int(missed.sum())} of {len(probes)} probes")
    return VerificationReport(
        n_probe=len(probes),
        counterexample_count=int(missed.sum()),
        counterexamples=probes[missed][:100].tolist(),
        unique_cover_counts=unique_counts.tolist(),
        redundant_points=redundant,
        cover_holds=not missed.any(),
        box_centers=centers,
        skipped_pieces=skipped,
    )

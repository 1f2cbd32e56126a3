import math
from typing import List, Optional

import numpy as np
from pydantic import validator

from redps.dominating.qp import QpResult, min_rate_point
from redps.event_sets.base import PolyhedralUnion
from redps.rate_models.gaussian import GaussianModel
from redps.schemas import SerializableModel
from redps.settings import settings
from redps.utils.exceptions import MaxPointsError
from redps.utils.logger import logger


class DominatingPoint(SerializableModel):
    point: np.ndarray
    rate: float
    tilt: np.ndarray
    piece_index: int


class DominatingSet(SerializableModel):
    """Dominating points in significance order plus the reason the search ended."""

    points: List[DominatingPoint]
    stopped_early: bool = False
    threshold_C: float
    exhausted: bool = False
    stop_reason: str = ""
    # rate of the rejected candidate when stopped early
    candidate_rate: Optional[float] = None

    @validator("threshold_C")
    def validate_threshold(cls, v):
        if not v > 1:
            raise ValueError("threshold_C must be greater than 1")
        return v

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def rates(self) -> np.ndarray:
        return np.array([point.rate for point in self.points])

    def truncate(self, k: int) -> "DominatingSet":
        if not 1 <= k <= self.k:
            raise ValueError(f"k must lie in [1, {self.k}], got {k}")
        if k == self.k:
            return self.copy()
        return DominatingSet(
            points=self.points[:k],
            stopped_early=self.stopped_early,
            threshold_C=self.threshold_C,
            exhausted=False,
            stop_reason="truncated",
            candidate_rate=self.points[k].rate,
        )

    def to_record(self) -> dict:
        """Plain-python record for JSON output; an infinite threshold is written as null."""
        return {
            "k": self.k,
            "stop_reason": self.stop_reason,
            "stopped_early": self.stopped_early,
            "exhausted": self.exhausted,
            "threshold_C": self.threshold_C if math.isfinite(self.threshold_C) else None,
            "candidate_rate": self.candidate_rate,
            "points": [
                {
                    "point": point.point.tolist(),
                    "rate": point.rate,
                    "tilt": point.tilt.tolist(),
                    "piece_index": point.piece_index,
                }
                for point in self.points
            ],
        }


def _precedes(candidate: QpResult, incumbent: QpResult) -> bool:
    """Lower objective wins; near-ties go to the lexicographically smaller point."""
    a, b = candidate.objective, incumbent.objective
    if abs(a - b) <= settings.tie_rtol * max(abs(a), abs(b)):
        return tuple(candidate.x_star) < tuple(incumbent.x_star)
    return a < b


def find_dominating_set(
    model: GaussianModel,
    union: PolyhedralUnion,
    C: Optional[float] = None,
    max_points: Optional[int] = None,
) -> DominatingSet:
    """
    Sequential dominating-point search.

    Each round solves one QP per piece under the accumulated cuts and keeps the
    minimum-rate feasible candidate. The search ends when every piece is
    infeasible (exhausted) or the candidate rate exceeds C times the last
    accepted rate (stopped early, candidate discarded).

    Raises:
        MaxPointsError: If max_points points were accepted and the search has
            not ended.
    """
    C = settings.default_C if C is None else float(C)
    max_points = settings.max_points if max_points is None else max_points
    if not isinstance(model, GaussianModel):
        raise TypeError("Dominating-point search requires a GaussianModel")
    if not C > 1:
        raise ValueError(f"C must be greater than 1, got {C}")
    if model.dimension != union.dimension:
        raise ValueError(f"Model dimension {model.dimension} does not match set dimension {union.dimension}")
    mean = model.mean()
    if union.contains(mean):
        raise ValueError("The mean lies inside the rare-event set; dominating points are undefined")

    points: List[DominatingPoint] = []
    cuts: List[tuple] = []
    stopped_early, exhausted = False, False
    candidate_rate = None

    while True:
        rate_k = points[-1].rate if points else 0.0
        delta_cut = settings.cut_delta_scale * (1.0 + rate_k)
        best_index, best = -1, None
        for index, piece in enumerate(union.pieces):
            result = min_rate_point(mean, model.chol, piece, cuts, delta_cut)
            if not result.optimal:
                continue
            if best is None or _precedes(result, best):
                best_index, best = index, result

        if best is None:
            exhausted = True
            break
        if points and best.objective > C * rate_k:
            stopped_early = True
            candidate_rate = best.objective
            break
        if len(points) >= max_points:
            raise MaxPointsError(max_points)
        if best.objective < rate_k - 1e-9 * (1.0 + rate_k):
            raise RuntimeError(f"Dominating-point rates decreased: {best.objective} after {rate_k}")

        tilt = model.tilt_param(best.x_star)
        points.append(DominatingPoint(point=best.x_star, rate=best.objective, tilt=tilt, piece_index=best_index))
        cuts.append((tilt, best.x_star))
        logger.debug(f"Dominating point {len(points)} from piece {best_index} with rate {best.objective:.6g}")

    stop_reason = "exhausted" if exhausted else "stopped_early"
    logger.info(f"Dominating-point search found {len(points)} points ({stop_reason})")
    return DominatingSet(
        points=points,
        stopped_early=stopped_early,
        threshold_C=C,
        exhausted=exhausted,
        stop_reason=stop_reason,
        candidate_rate=candidate_rate,
    )

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import validator
from scipy.optimize import linprog

from redps.event_sets.base import Polyhedron
from redps.schemas import SerializableModel
from redps.settings import settings
from redps.utils.exceptions import QpIterationError
from redps.utils.logger import logger

Cut = Tuple[np.ndarray, np.ndarray]

# cut margins are about 5e-8, below the HiGHS default feasibility tolerance
HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


class QpResult(SerializableModel):
    status: str
    x_star: Optional[np.ndarray] = None
    # rate value (x - mean)^T cov^{-1} (x - mean) / 2
    objective: Optional[float] = None
    active_rows: List[int] = []
    multipliers: Optional[np.ndarray] = None
    kkt_residual: Optional[float] = None
    min_violation: Optional[float] = None
    iterations: int = 0

    @validator("status")
    def validate_status(cls, v):
        if v not in ("optimal", "infeasible"):
            raise ValueError(f"Unknown QP status {v}")
        return v

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def assemble_constraints(piece: Polyhedron, cuts: Sequence[Cut], delta_cut: float):
    """
    Stack piece rows and cut rows as G x >= h, every row at unit norm.

    A cut (s, a) becomes -u^T x >= -u^T a + delta_cut with u = s / ||s||,
    the closed form of u^T (x - a) <= -delta_cut.
    """
    finite = np.isfinite(piece.offsets)
    weights = [piece.weights[finite]]
    offsets = [piece.offsets[finite]]
    for s, a in cuts:
        s = np.asarray(s, dtype=float)
        norm = np.linalg.norm(s)
        if norm == 0:
            raise ValueError("Cut tilt vectors must be nonzero")
        u = s / norm
        weights.append(-u[None, :])
        offsets.append(np.array([-(u @ np.asarray(a, dtype=float)) + delta_cut]))
    return np.vstack(weights), np.concatenate(offsets)


def dual_active_set(A: np.ndarray, c: np.ndarray, tol: float, max_iter: int):
    """
    Goldfarb-Idnani dual active-set method for min ||z||^2 / 2 subject to A z >= c.

    Starts from the unconstrained minimizer z = 0 and adds the most violated
    row each round, dropping active rows whose multipliers would turn negative.
    Returns (status, z, active, multipliers, iterations, trace).
    """
    q, d = A.shape
    z = np.zeros(d)
    active: List[int] = []
    u = np.zeros(0)
    trace: List[tuple] = []
    iterations = 0

    while True:
        slack = A @ z - c
        masked = slack.copy()
        masked[active] = np.inf
        p = int(np.argmin(masked))
        if masked[p] >= -tol:
            return "optimal", z, active, u, iterations, trace

        n_p = A[p]
        u_p = 0.0
        while True:
            iterations += 1
            violation = float(c[p] - n_p @ z)
            trace.append((iterations, p, tuple(active), violation))
            if iterations > max_iter:
                raise QpIterationError(f"Dual active-set loop exceeded {max_iter} iterations", trace)

            if active:
                N = A[active].T
                r = np.linalg.lstsq(N, n_p, rcond=None)[0]
                step = n_p - N @ r
            else:
                r = np.zeros(0)
                step = n_p.copy()

            t_dual, blocking = np.inf, -1
            if r.size:
                positive = r > 1e-14 * max(1.0, float(np.abs(r).max()))
                if positive.any():
                    ratios = np.full(r.shape, np.inf)
                    ratios[positive] = u[positive] / r[positive]
                    blocking = int(np.argmin(ratios))
                    t_dual = float(ratios[blocking])

            step_sq = float(step @ step)
            t_primal = violation / step_sq if step_sq > 1e-14 * float(n_p @ n_p) else np.inf
            t = min(t_dual, t_primal)
            if not np.isfinite(t):
                return "infeasible", z, active, u, iterations, trace

            if np.isfinite(t_primal):
                z = z + t * step
            u = u - t * r
            u_p += t

            if t_primal <= t_dual:
                active.append(p)
                u = np.append(u, u_p)
                break
            del active[blocking]
            u = np.delete(u, blocking)


def phase_one_violation(G: np.ndarray, h: np.ndarray) -> float:
    """Minimum over x of the largest violation of G x >= h (zero when feasible)."""
    q, d = G.shape
    objective = np.zeros(d + 1)
    objective[-1] = 1.0
    A_ub = np.hstack([-G, -np.ones((q, 1))])
    bounds = [(None, None)] * d + [(0, None)]
    result = linprog(objective, A_ub=A_ub, b_ub=-h, bounds=bounds, method="highs", options=HIGHS_OPTIONS)
    if result.status != 0:
        raise QpIterationError(f"Phase-1 feasibility problem failed: {result.message}", [])
    return float(result.fun)


def min_rate_point(
    mean,
    chol,
    piece: Polyhedron,
    cuts: Sequence[Cut] = (),
    delta_cut: float = 0.0,
    max_iter: Optional[int] = None,
) -> QpResult:
    """
    Minimize (x - mean)^T cov^{-1} (x - mean) / 2 over the piece, with every cut
    (s_j, a_j) imposed as s_j^T (x - a_j) <= -delta_cut.

    Feasibility is decided by a phase-1 LP before any active-set work: the result
    is infeasible iff the minimum violation exceeds settings.tol_feas. Feasible
    problems are solved in whitened coordinates z = L^{-1} (x - mean) where the
    objective is ||z||^2 / 2, and the solution is only returned once its KKT
    residual is within settings.tol_kkt.

    Raises:
        QpIterationError: The active-set loop exhausted its iterations, reported
            infeasibility on a certified feasible problem, or ended with a KKT
            residual above tolerance.
    """
    mean = np.asarray(mean, dtype=float)
    chol = np.asarray(chol, dtype=float)
    max_iter = settings.qp_max_iter if max_iter is None else max_iter
    G, h = assemble_constraints(piece, cuts, delta_cut)
    if G.shape[0] == 0:
        return QpResult(status="optimal", x_star=mean.copy(), objective=0.0, kkt_residual=0.0)

    violation = phase_one_violation(G, h)
    if violation > settings.tol_feas:
        logger.debug(f"QP infeasible, phase-1 violation {violation:.3e}")
        return QpResult(status="infeasible", min_violation=violation)

    A = G @ chol
    c = h - G @ mean
    status, z, active, u, iterations, trace = dual_active_set(A, c, 0.1 * settings.tol_feas, max_iter)
    if status == "infeasible":
        raise QpIterationError(
            f"Active-set loop reported infeasible but phase-1 violation is {violation:.3e}", trace
        )

    multipliers = np.zeros(G.shape[0])
    multipliers[active] = u
    slack = A @ z - c
    stationarity = float(np.linalg.norm(z - A.T @ multipliers))
    complementarity = float(np.max(np.abs(multipliers * slack))) if active else 0.0
    dual_infeasibility = float(max(0.0, -multipliers.min()))
    primal_infeasibility = float(max(0.0, -slack.min()))
    kkt_residual = max(stationarity, complementarity, dual_infeasibility, primal_infeasibility)
    if kkt_residual > settings.tol_kkt * (1.0 + float(np.linalg.norm(z))):
        raise QpIterationError(f"QP KKT residual {kkt_residual:.3e} exceeds tolerance", trace)

    return QpResult(
        status="optimal",
        x_star=mean + chol @ z,
        objective=0.5 * float(z @ z),
        active_rows=sorted(active),
        multipliers=multipliers,
        kkt_residual=kkt_residual,
        min_violation=violation,
        iterations=iterations,
    )

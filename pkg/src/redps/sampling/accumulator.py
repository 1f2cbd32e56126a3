from typing import List, Optional

import numpy as np


class RunningState:
    """
    One-pass summary of per-replication outputs for a chunk of draws.

    States merge with the pairwise update of Chan, Golub and LeVeque, so
    folding chunk states left to right in chunk order is independent of how
    the chunks were distributed over workers.
    """

    def __init__(
        self,
        count: int = 0,
        mean: float = 0.0,
        m2: float = 0.0,
        hits_e1: int = 0,
        hits_e2: int = 0,
        max_log_lr: float = -np.inf,
        component_draws: Optional[List[int]] = None,
        bound_violations: int = 0,
        outputs: Optional[np.ndarray] = None,
    ):
        self.count = count
        self.mean = mean
        self.m2 = m2
        self.hits_e1 = hits_e1
        self.hits_e2 = hits_e2
        self.max_log_lr = max_log_lr
        self.component_draws = list(component_draws or [])
        self.bound_violations = bound_violations
        self.outputs = outputs

    @classmethod
    def from_outputs(
        cls,
        outputs: np.ndarray,
        hits_e1: int,
        hits_e2: int,
        log_lr_on_hits: np.ndarray,
        component_draws: List[int],
        bound_violations: int = 0,
        keep_outputs: bool = False,
    ) -> "RunningState":
        outputs = np.asarray(outputs, dtype=float)
        mean = float(outputs.mean())
        return cls(
            count=outputs.size,
            mean=mean,
            m2=float(np.sum((outputs - mean) ** 2)),
            hits_e1=int(hits_e1),
            hits_e2=int(hits_e2),
            max_log_lr=float(log_lr_on_hits.max()) if log_lr_on_hits.size else -np.inf,
            component_draws=[int(c) for c in component_draws],
            bound_violations=int(bound_violations),
            outputs=outputs.copy() if keep_outputs else None,
        )

    def merge(self, other: "RunningState") -> "RunningState":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        width = max(len(self.component_draws), len(other.component_draws))
        draws = [
            (self.component_draws[i] if i < len(self.component_draws) else 0)
            + (other.component_draws[i] if i < len(other.component_draws) else 0)
            for i in range(width)
        ]
        outputs = None
        if self.outputs is not None and other.outputs is not None:
            outputs = np.concatenate([self.outputs, other.outputs])
        return RunningState(
            count=count,
            mean=mean,
            m2=m2,
            hits_e1=self.hits_e1 + other.hits_e1,
            hits_e2=self.hits_e2 + other.hits_e2,
            max_log_lr=max(self.max_log_lr, other.max_log_lr),
            component_draws=draws,
            bound_violations=self.bound_violations + other.bound_violations,
            outputs=outputs,
        )

    @property
    def variance(self) -> float:
        """Unbiased sample variance; zero for fewer than two outputs."""
        if self.count < 2:
            return 0.0
        return max(self.m2 / (self.count - 1), 0.0)


def merge_states(states: List[RunningState]) -> RunningState:
    merged = RunningState()
    for state in states:
        merged = merged.merge(state)
    return merged

import math
from typing import List, Optional

import numpy as np
from pydantic import Field, root_validator, validator

from redps.sampling.accumulator import RunningState
from redps.schemas import SerializableModel


class EstimationReport(SerializableModel):
    estimator: str
    p_hat: float
    v_n: float
    n: int
    seed: int
    hits_e1: int = 0
    hits_e2: int = 0
    # None when no replication hit the set
    max_log_lr_on_hit: Optional[float] = None
    per_component_draws: List[int] = []
    wall_time: float = 0.0
    lr_bound: Optional[float] = None
    bound_violations: int = 0
    seed_count: int = 1
    outputs: Optional[np.ndarray] = Field(default=None, exclude=True)

    @validator("p_hat", "v_n")
    def validate_nonnegative(cls, v, field):
        if v < 0:
            raise ValueError(f"{field.name} must be nonnegative, got {v}")
        return v

    @root_validator(skip_on_failure=True)
    def validate_hits(cls, values):
        if values["hits_e1"] + values["hits_e2"] > values["n"]:
            raise ValueError("hits_e1 + hits_e2 cannot exceed n")
        return values

    @classmethod
    def from_state(
        cls,
        estimator: str,
        state: RunningState,
        seed: int,
        wall_time: float,
        lr_bound: Optional[float] = None,
    ) -> "EstimationReport":
        return cls(
            estimator=estimator,
            p_hat=max(state.mean, 0.0),
            v_n=state.variance,
            n=state.count,
            seed=seed,
            hits_e1=state.hits_e1,
            hits_e2=state.hits_e2,
            max_log_lr_on_hit=state.max_log_lr if math.isfinite(state.max_log_lr) else None,
            per_component_draws=state.component_draws,
            wall_time=wall_time,
            lr_bound=lr_bound,
            bound_violations=state.bound_violations,
            outputs=state.outputs,
        )

    @property
    def std_error(self) -> float:
        return math.sqrt(self.v_n / self.n)

    def to_state(self) -> RunningState:
        return RunningState(
            count=self.n,
            mean=self.p_hat,
            m2=self.v_n * (self.n - 1),
            hits_e1=self.hits_e1,
            hits_e2=self.hits_e2,
            max_log_lr=self.max_log_lr_on_hit if self.max_log_lr_on_hit is not None else -np.inf,
            component_draws=self.per_component_draws,
            bound_violations=self.bound_violations,
            outputs=self.outputs,
        )

    def merge(self, other: "EstimationReport") -> "EstimationReport":
        """Pool two reports of the same estimator as if their replications formed one run."""
        merged = self.to_state().merge(other.to_state())
        report = EstimationReport.from_state(
            self.estimator, merged, self.seed, self.wall_time + other.wall_time, self.lr_bound
        )
        report.seed_count = self.seed_count + other.seed_count
        return report

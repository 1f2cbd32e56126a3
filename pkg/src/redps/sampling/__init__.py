from redps.sampling.accumulator import RunningState, merge_states
from redps.sampling.estimators import (
    run_alpha_hat,
    run_beta_hat,
    run_crude_mc,
    run_is_estimation,
    run_replications,
)
from redps.sampling.mixture import MixtureSampler, log_likelihood_ratio, sample_mixture
from redps.sampling.report import EstimationReport
from redps.sampling.rng import chunk_generator, replication_seeds

__all__ = [
    "RunningState",
    "merge_states",
    "MixtureSampler",
    "sample_mixture",
    "log_likelihood_ratio",
    "EstimationReport",
    "run_is_estimation",
    "run_crude_mc",
    "run_alpha_hat",
    "run_beta_hat",
    "run_replications",
    "chunk_generator",
    "replication_seeds",
]

import functools
import math
import time
from typing import Callable, List, Optional

import numpy as np

from redps.event_sets.base import PolyhedralUnion
from redps.event_sets.split import RegionSplit
from redps.rate_models.base import RateModel
from redps.rate_models.increments import NormalMinusExpSumModel
from redps.sampling.accumulator import RunningState, merge_states
from redps.sampling.mixture import MixtureSampler
from redps.sampling.report import EstimationReport
from redps.sampling.rng import chunk_generator, chunk_sizes, ordered_map, replication_seeds
from redps.settings import settings
from redps.utils.logger import logger

# relative slack on the likelihood-ratio bound check
BOUND_RTOL = 1e-9


def _check_n(n: int):
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")


def _run_chunks(chunk_fn: Callable, n: int, workers: Optional[int]) -> RunningState:
    sizes = chunk_sizes(n, settings.chunk_size)
    jobs = list(enumerate(sizes))
    states = ordered_map(chunk_fn, jobs, workers)
    logger.debug(f"Merging {len(states)} chunk states")
    return merge_states(states)


def _is_chunk(job, model, union, split, mix, seed, keep_outputs) -> RunningState:
    index, size = job
    rng = chunk_generator(seed, index)
    draws, components = mix.sample_mixture(rng, size)
    inside = union.contains(draws)
    covered = split.covered(draws)
    in_e1 = inside & covered
    in_e2 = inside & ~covered
    log_lr = mix.log_likelihood_ratio(draws)

    outputs = np.zeros(size)
    with np.errstate(over="ignore"):
        outputs[inside] = np.exp(log_lr[inside])
    bound = mix.lr_bound() * (1.0 + BOUND_RTOL)
    violations = int(np.count_nonzero(outputs[in_e1] > bound))
    if violations:
        logger.warning(f"{violations} outputs on E1 exceed the likelihood-ratio bound {bound:.6e}")
    if in_e2.any():
        logger.warning(f"Chunk {index}: {int(in_e2.sum())} hits in the residual region E2")
    return RunningState.from_outputs(
        outputs,
        hits_e1=int(in_e1.sum()),
        hits_e2=int(in_e2.sum()),
        log_lr_on_hits=log_lr[inside],
        component_draws=np.bincount(components, minlength=mix.k).tolist(),
        bound_violations=violations,
        keep_outputs=keep_outputs,
    )


def run_is_estimation(
    model: RateModel,
    union: PolyhedralUnion,
    split: RegionSplit,
    mix: MixtureSampler,
    n: int,
    seed: int,
    workers: Optional[int] = 1,
    keep_outputs: bool = False,
) -> EstimationReport:
    """
    Mixture importance-sampling estimate of P(X in E).

    Each replication outputs I_E(x) L(x) with x drawn from the mixture. Hits in
    E2 enter the estimate unchanged and are counted separately.
    """
    _check_n(n)
    if model.dimension != union.dimension:
        raise ValueError(f"Model dimension {model.dimension} does not match set dimension {union.dimension}")
    start = time.perf_counter()
    chunk_fn = functools.partial(
        _is_chunk, model=model, union=union, split=split, mix=mix, seed=seed, keep_outputs=keep_outputs
    )
    state = _run_chunks(chunk_fn, n, workers)
    report = EstimationReport.from_state(
        f"is_k{mix.k}", state, seed, time.perf_counter() - start, lr_bound=mix.lr_bound()
    )
    if report.hits_e2:
        logger.warning(f"IS run with seed {seed} hit E2 {report.hits_e2} times")
    return report


def _crude_chunk(job, model, union, seed, keep_outputs) -> RunningState:
    index, size = job
    rng = chunk_generator(seed, index)
    draws = model.sample_tilted(np.zeros(model.dimension), rng, size)
    inside = union.contains(draws)
    return RunningState.from_outputs(
        inside.astype(float),
        hits_e1=int(inside.sum()),
        hits_e2=0,
        log_lr_on_hits=np.zeros(int(inside.sum())),
        component_draws=[size],
        keep_outputs=keep_outputs,
    )


def run_crude_mc(
    model: RateModel,
    union: PolyhedralUnion,
    n: int,
    seed: int,
    workers: Optional[int] = 1,
    keep_outputs: bool = False,
) -> EstimationReport:
    _check_n(n)
    start = time.perf_counter()
    chunk_fn = functools.partial(_crude_chunk, model=model, union=union, seed=seed, keep_outputs=keep_outputs)
    state = _run_chunks(chunk_fn, n, workers)
    report = EstimationReport.from_state("crude", state, seed, time.perf_counter() - start)
    # exact Bernoulli form instead of the streamed value
    p_hat = state.hits_e1 / n
    report.p_hat = p_hat
    report.v_n = p_hat * (1.0 - p_hat) * n / (n - 1)
    return report


def _tilted_sum_terms(model: NormalMinusExpSumModel, theta: np.ndarray, rng, size):
    sums = model.sample_tilted(theta, rng, size)[:, 0]
    log_lr = model.log_lr_single(theta, sums[:, None])
    return sums, log_lr


def _alpha_chunk(job, model, a, seed, keep_outputs) -> RunningState:
    index, size = job
    level = a * model.m
    theta = model.tilt_param([level])
    rng = chunk_generator(seed, index)
    sums, log_lr = _tilted_sum_terms(model, theta, rng, size)
    right = sums >= level
    left = sums <= -level
    inside = right | left
    outputs = np.zeros(size)
    with np.errstate(over="ignore"):
        outputs[inside] = np.exp(log_lr[inside])
    bound = math.exp(-model.rate([level])) * (1.0 + BOUND_RTOL)
    violations = int(np.count_nonzero(outputs[right] > bound))
    return RunningState.from_outputs(
        outputs,
        hits_e1=int(right.sum()),
        hits_e2=int(left.sum()),
        log_lr_on_hits=log_lr[inside],
        component_draws=[size],
        bound_violations=violations,
        keep_outputs=keep_outputs,
    )


def run_alpha_hat(
    model: NormalMinusExpSumModel,
    a: float,
    n: int,
    seed: int,
    workers: Optional[int] = 1,
    keep_outputs: bool = False,
) -> EstimationReport:
    """
    Single-tilt estimator of P(|S_m| >= a m): S_m is drawn under the tilt of the
    right endpoint a m only, so left-tail hits land in E2.
    """
    _check_n(n)
    if a <= 0:
        raise ValueError("a must be positive")
    start = time.perf_counter()
    chunk_fn = functools.partial(_alpha_chunk, model=model, a=a, seed=seed, keep_outputs=keep_outputs)
    state = _run_chunks(chunk_fn, n, workers)
    bound = math.exp(-model.rate([a * model.m]))
    return EstimationReport.from_state("alpha_hat", state, seed, time.perf_counter() - start, lr_bound=bound)


def _beta_chunk(job, model, a, seed, keep_outputs) -> RunningState:
    index, size = job
    level = a * model.m
    theta_right = model.tilt_param([level])
    theta_left = model.tilt_param([-level])
    right_sums, right_log_lr = _tilted_sum_terms(model, theta_right, chunk_generator(seed, index, stream=0), size)
    left_sums, left_log_lr = _tilted_sum_terms(model, theta_left, chunk_generator(seed, index, stream=1), size)
    right = right_sums >= level
    left = left_sums <= -level
    outputs = np.zeros(size)
    with np.errstate(over="ignore"):
        outputs[right] += np.exp(right_log_lr[right])
        outputs[left] += np.exp(left_log_lr[left])
    bound = (math.exp(-model.rate([level])) + math.exp(-model.rate([-level]))) * (1.0 + BOUND_RTOL)
    violations = int(np.count_nonzero(outputs > bound))
    return RunningState.from_outputs(
        outputs,
        hits_e1=int(np.count_nonzero(right | left)),
        hits_e2=0,
        log_lr_on_hits=np.concatenate([right_log_lr[right], left_log_lr[left]]),
        component_draws=[size, size],
        bound_violations=violations,
        keep_outputs=keep_outputs,
    )


def run_beta_hat(
    model: NormalMinusExpSumModel,
    a: float,
    n: int,
    seed: int,
    workers: Optional[int] = 1,
    keep_outputs: bool = False,
) -> EstimationReport:
    """
    Two-tilt estimator of P(|S_m| >= a m).

    Every replication draws one S_m under the right-endpoint tilt (stream 0)
    and an independent S_m under the left-endpoint tilt (stream 1), and
    outputs the sum of the two likelihood-ratio-weighted tail indicators.
    """
    _check_n(n)
    if a <= 0:
        raise ValueError("a must be positive")
    start = time.perf_counter()
    chunk_fn = functools.partial(_beta_chunk, model=model, a=a, seed=seed, keep_outputs=keep_outputs)
    state = _run_chunks(chunk_fn, n, workers)
    level = a * model.m
    bound = math.exp(-model.rate([level])) + math.exp(-model.rate([-level]))
    return EstimationReport.from_state("beta_hat", state, seed, time.perf_counter() - start, lr_bound=bound)


def _replicate(seed, run_fn) -> EstimationReport:
    return run_fn(seed=seed)


def run_replications(
    run_fn: Callable[..., EstimationReport],
    seed: int,
    count: int,
    workers: Optional[int] = 1,
) -> List[EstimationReport]:
    """
    Independent replications of one estimator.

    run_fn is called with a single keyword argument `seed` (bind the rest with
    functools.partial); replication seeds are derived from `seed`.
    """
    if count < 1:
        raise ValueError("count must be positive")
    seeds = replication_seeds(seed, count)
    return ordered_map(functools.partial(_replicate, run_fn=run_fn), seeds, workers)

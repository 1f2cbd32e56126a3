import functools
import math

import numpy as np
import pytest
from scipy.special import ndtr

from redps.bench.oracles import oracle_iid_sum, oracle_two_tail
from redps.dominating import find_dominating_set
from redps.event_sets import halfspace_set, split_regions
from redps.rate_models.gaussian import GaussianModel
from redps.rate_models.increments import NormalMinusExpSumModel
from redps.sampling import (
    EstimationReport,
    MixtureSampler,
    RunningState,
    chunk_generator,
    log_likelihood_ratio,
    merge_states,
    replication_seeds,
    run_alpha_hat,
    run_beta_hat,
    run_crude_mc,
    run_is_estimation,
    run_replications,
    sample_mixture,
)
from redps.sampling.rng import chunk_sizes


@pytest.fixture
def two_tail_mixture(standard_normal, two_tail):
    dom = find_dominating_set(standard_normal, two_tail, C=math.inf)
    return dom, MixtureSampler.from_dominating_set(standard_normal, dom)


def test_chunk_generator_is_reproducible():
    first = chunk_generator(7, 3).standard_normal(5)
    again = chunk_generator(7, 3).standard_normal(5)
    other_chunk = chunk_generator(7, 4).standard_normal(5)
    other_stream = chunk_generator(7, 3, stream=1).standard_normal(5)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other_chunk)
    assert not np.array_equal(first, other_stream)


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]
    with pytest.raises(ValueError):
        chunk_sizes(0, 4)


def test_replication_seeds():
    seeds = replication_seeds(11, 5)
    assert seeds == replication_seeds(11, 5)
    assert len(set(seeds)) == 5
    assert all(0 <= seed < 2**64 for seed in seeds)


# Test chunk states merge to the statistics of the whole sample
def test_running_state_merge(rng):
    outputs = rng.exponential(size=1000)
    parts = np.split(outputs, [100, 350, 900])
    states = [
        RunningState.from_outputs(
            part, hits_e1=part.size, hits_e2=0, log_lr_on_hits=-part, component_draws=[part.size]
        )
        for part in parts
    ]
    merged = merge_states(states)
    assert merged.count == 1000
    assert merged.mean == pytest.approx(outputs.mean(), rel=1e-12)
    assert merged.variance == pytest.approx(outputs.var(ddof=1), rel=1e-10)
    assert merged.component_draws == [1000]
    assert merged.max_log_lr == pytest.approx((-outputs).max())


def test_mixture_weights_validation(standard_normal):
    components = [(np.array([4.0]), np.array([4.0])), (np.array([-8.0]), np.array([-8.0]))]
    with pytest.raises(ValueError):
        MixtureSampler(standard_normal, components, [0.5, 0.6])
    with pytest.raises(ValueError):
        MixtureSampler(standard_normal, components, [1.0, 0.0])
    with pytest.raises(ValueError):
        MixtureSampler(standard_normal, components, [1.0])
    with pytest.raises(ValueError):
        MixtureSampler(standard_normal, [])


def test_mixture_rates_and_bound(two_tail_mixture):
    _, mix = two_tail_mixture
    assert mix.k == 2
    assert np.allclose(mix.component_rates, [8.0, 32.0])
    assert mix.min_weight == 0.5
    assert mix.lr_bound() == pytest.approx(2.0 * math.exp(-8.0))


def test_mixture_log_likelihood_ratio(two_tail_mixture):
    _, mix = two_tail_mixture
    x = np.array([[4.5], [-8.5], [0.0]])
    # L(x) = 1 / (0.5 exp(4x - 8) + 0.5 exp(-8x - 32))
    expected = -np.log(0.5 * np.exp(4 * x[:, 0] - 8) + 0.5 * np.exp(-8 * x[:, 0] - 32))
    assert np.allclose(mix.log_likelihood_ratio(x), expected)
    assert log_likelihood_ratio(mix, x[0]) == pytest.approx(expected[0])


def test_single_component_matches_single_tilt(standard_normal):
    mix = MixtureSampler(standard_normal, [(np.array([4.0]), np.array([4.0]))])
    x = np.array([[3.0], [5.0]])
    assert np.allclose(mix.log_likelihood_ratio(x), standard_normal.log_lr_single([4.0], x))


def test_sample_mixture_components(two_tail_mixture, rng):
    _, mix = two_tail_mixture
    draws, components = mix.sample_mixture(rng, 4000)
    assert draws.shape == (4000, 1)
    assert abs(np.mean(components == 0) - 0.5) < 0.05
    assert abs(draws[components == 0].mean() - 4.0) < 0.1
    assert abs(draws[components == 1].mean() + 8.0) < 0.1
    single, component = sample_mixture(mix, rng)
    assert single.shape == (1,)
    assert component in (0, 1)


# Test the full mixture estimate against the closed form
def test_is_estimate_two_tail(standard_normal, two_tail, two_tail_mixture):
    dom, mix = two_tail_mixture
    report = run_is_estimation(standard_normal, two_tail, split_regions(two_tail, dom), mix, 20000, seed=1)
    p = oracle_two_tail(4.0, 2.0).p_exact
    assert abs(report.p_hat - p) <= 4 * report.std_error
    assert report.hits_e2 == 0
    assert report.bound_violations == 0
    assert report.estimator == "is_k2"
    assert report.lr_bound == pytest.approx(mix.lr_bound())
    assert sum(report.per_component_draws) == 20000


# Test E_mix[L] = 1 over the whole space
def test_likelihood_ratio_has_unit_mean(rng):
    model = GaussianModel.isotropic(2)
    tilts = [np.array([1.0, 0.0]), np.array([0.0, 1.5]), np.array([-1.0, -1.0])]
    mix = MixtureSampler(model, [(s, model.cgf_grad(s)) for s in tilts], [0.5, 0.25, 0.25])
    draws, _ = mix.sample_mixture(rng, 40000)
    values = np.exp(mix.log_likelihood_ratio(draws))
    assert abs(values.mean() - 1.0) <= 4 * values.std(ddof=1) / math.sqrt(values.size)


def test_is_agrees_with_crude_mc():
    model = GaussianModel([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
    union = halfspace_set([([1.0, 1.0], 2.85), ([1.0, -1.0], 2.2)])
    dom = find_dominating_set(model, union, C=math.inf)
    assert dom.k == 2
    mix = MixtureSampler.from_dominating_set(model, dom)
    is_report = run_is_estimation(model, union, split_regions(union, dom), mix, 20000, seed=5)
    crude = run_crude_mc(model, union, 200000, seed=6)
    # p is about 1e-2, so crude Monte Carlo resolves it
    assert 5e-3 < crude.p_hat < 2e-2
    joint = math.sqrt(is_report.std_error**2 + crude.std_error**2)
    assert abs(is_report.p_hat - crude.p_hat) <= 4 * joint
    assert is_report.std_error < crude.std_error


def test_single_tilt_misses_left_tail(standard_normal):
    union = halfspace_set([([1.0], 4.0), ([-1.0], 4.04)])
    dom = find_dominating_set(standard_normal, union, C=math.inf)
    head = dom.truncate(1)
    mix = MixtureSampler.from_dominating_set(standard_normal, head)
    report = run_is_estimation(standard_normal, union, split_regions(union, head), mix, 2000, seed=4)
    # only the right tail is seen, so the estimate sits near Phibar(4) instead of p
    assert report.hits_e2 == 0
    assert report.p_hat == pytest.approx(float(ndtr(-4.0)), rel=0.25)


def test_worker_count_does_not_change_results(standard_normal, two_tail, two_tail_mixture, small_chunks):
    dom, mix = two_tail_mixture
    split = split_regions(two_tail, dom)
    serial = run_is_estimation(standard_normal, two_tail, split, mix, 5000, seed=9, workers=1)
    pooled = run_is_estimation(standard_normal, two_tail, split, mix, 5000, seed=9, workers=2)
    assert serial.p_hat == pooled.p_hat
    assert serial.v_n == pooled.v_n
    assert serial.per_component_draws == pooled.per_component_draws


def test_crude_mc(standard_normal):
    union = halfspace_set([([1.0], 1.0)])
    report = run_crude_mc(standard_normal, union, 20000, seed=2, keep_outputs=True)
    p = float(ndtr(-1.0))
    assert abs(report.p_hat - p) <= 4 * report.std_error
    assert report.v_n == pytest.approx(report.p_hat * (1 - report.p_hat) * 20000 / 19999)
    assert report.outputs.size == 20000
    assert report.hits_e1 == int(report.outputs.sum())


def test_beta_hat_iid_sum(increment_model):
    report = run_beta_hat(increment_model, 1.5, 20000, seed=7)
    p = oracle_iid_sum(10, 1.5).p_exact
    assert abs(report.p_hat - p) <= 4 * report.std_error
    assert report.per_component_draws == [20000, 20000]
    assert report.bound_violations == 0


@pytest.mark.parametrize("m", [10, 30])
def test_beta_hat_tracks_oracle_across_m(m):
    report = run_beta_hat(NormalMinusExpSumModel(m), 1.5, 20000, seed=11)
    p = oracle_iid_sum(m, 1.5).p_exact
    assert abs(report.p_hat - p) <= 4 * report.std_error
    assert report.std_error / p < 0.1


def test_alpha_hat_iid_sum(increment_model):
    report = run_alpha_hat(increment_model, 1.5, 20000, seed=7)
    p = oracle_iid_sum(10, 1.5).p_exact
    # left-tail hits are rare under the right tilt, so alpha_hat sits at or below p
    assert report.p_hat <= p + 4 * report.std_error
    assert report.hits_e1 > 0
    assert report.lr_bound == pytest.approx(math.exp(-10 * pytest.RATE_A), rel=1e-4)


def test_estimation_rejects_small_n(standard_normal):
    with pytest.raises(ValueError):
        run_crude_mc(standard_normal, halfspace_set([([1.0], 1.0)]), 1, seed=0)


def test_run_replications_is_deterministic(standard_normal):
    union = halfspace_set([([1.0], 1.0)])
    run = functools.partial(run_crude_mc, standard_normal, union, 500)
    first = run_replications(run, 3, 4)
    again = run_replications(run, 3, 4)
    assert len(first) == 4
    assert [r.p_hat for r in first] == [r.p_hat for r in again]
    assert len({r.seed for r in first}) == 4


def test_report_merge():
    left = EstimationReport(estimator="crude", p_hat=0.1, v_n=0.09, n=100, seed=1, hits_e1=10)
    right = EstimationReport(estimator="crude", p_hat=0.3, v_n=0.21, n=100, seed=2, hits_e1=30)
    merged = left.merge(right)
    assert merged.n == 200
    assert merged.p_hat == pytest.approx(0.2)
    assert merged.hits_e1 == 40
    assert merged.seed_count == 2


def test_report_validation():
    with pytest.raises(ValueError):
        EstimationReport(estimator="crude", p_hat=0.1, v_n=0.1, n=10, seed=0, hits_e1=8, hits_e2=5)
    with pytest.raises(ValueError):
        EstimationReport(estimator="crude", p_hat=-0.1, v_n=0.1, n=10, seed=0)

import numpy as np
import pytest

from redps.rate_models.gaussian import GaussianModel
from redps.rate_models.increments import NormalMinusExpSumModel
from redps.utils.exceptions import OutOfDomainError, TiltSolveError


@pytest.fixture
def correlated():
    return GaussianModel([1.0, 0.0], [[2.0, 0.5], [0.5, 1.0]])


# Test the Gaussian rate is the Mahalanobis form
def test_gaussian_rate_quadratic_form(correlated):
    y = np.array([3.0, 1.0])
    centered = y - correlated.mean()
    expected = 0.5 * centered @ np.linalg.solve(correlated.cov, centered)
    assert correlated.rate(y) == pytest.approx(expected, rel=1e-12)
    assert correlated.rate(correlated.mean()) == pytest.approx(0.0, abs=1e-15)


def test_gaussian_tilt_solves_gradient_equation(correlated):
    y = np.array([-2.0, 4.0])
    s = correlated.tilt_param(y)
    assert np.allclose(correlated.cgf_grad(s), y, atol=1e-12)
    assert np.allclose(correlated.newton_tilt(y), s, atol=1e-10)
    # I(y) = s^T y - mu(s)
    assert correlated.rate(y) == pytest.approx(s @ y - correlated.cgf(s), rel=1e-10)


def test_gaussian_rejects_bad_covariance():
    with pytest.raises(ValueError):
        GaussianModel([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        GaussianModel([0.0, 0.0], [[1.0, 0.3], [0.0, 1.0]])
    with pytest.raises(ValueError):
        GaussianModel([0.0], [[1.0, 0.0], [0.0, 1.0]])


def test_gaussian_sample_shapes(correlated, rng):
    assert correlated.sample_tilted(np.zeros(2), rng).shape == (2,)
    assert correlated.sample_tilted(np.zeros(2), rng, 5).shape == (5, 2)


def test_gaussian_tilted_sample_mean(correlated, rng):
    s = np.array([0.5, -1.0])
    draws = correlated.sample_tilted(s, rng, 20000)
    spread = np.sqrt(np.diag(correlated.cov) / 20000)
    assert np.all(np.abs(draws.mean(axis=0) - correlated.cgf_grad(s)) < 5 * spread)


def test_single_tilt_log_likelihood_ratio(standard_normal):
    x = np.array([[4.5], [-1.0]])
    expected = -(4.0 * x[:, 0] - 8.0)
    assert np.allclose(standard_normal.log_lr_single([4.0], x), expected)


# Test the increment model's closed-form tilts at level +-1.5
def test_increment_tilts(increment_model):
    assert increment_model.increment_tilt(1.5) == pytest.approx(pytest.THETA_A, abs=1e-10)
    assert increment_model.increment_tilt(-1.5) == pytest.approx(pytest.THETA_MINUS_A, abs=1e-10)


def test_increment_rates(increment_model):
    assert increment_model.increment_rate(1.5) == pytest.approx(pytest.RATE_A, abs=1e-5)
    assert increment_model.increment_rate(-1.5) == pytest.approx(pytest.RATE_MINUS_A, abs=1e-5)
    # the left endpoint is the less likely one
    assert increment_model.increment_rate(-1.5) > increment_model.increment_rate(1.5)


def test_sum_rate_scales_with_m(increment_model):
    assert increment_model.rate([15.0]) == pytest.approx(10 * pytest.RATE_A, abs=1e-4)
    assert increment_model.tilt_param([15.0])[0] == pytest.approx(pytest.THETA_A, abs=1e-10)
    assert increment_model.with_m(20).rate([30.0]) == pytest.approx(20 * pytest.RATE_A, abs=1e-4)


def test_increment_mean(increment_model):
    # E(A - B) = 1.5 - 1 per increment
    assert increment_model.mean()[0] == pytest.approx(5.0)


def test_increment_cgf_domain(increment_model):
    with pytest.raises(OutOfDomainError) as exc_info:
        increment_model.cgf([-1.0])
    assert exc_info.value.value == -1.0
    with pytest.raises(ValueError):
        increment_model.cgf([-2.0])


def test_increment_tilt_iteration_budget():
    # every level is reachable, so only the iteration budget can fail
    from redps.settings import settings

    previous = settings.newton_max_iter
    settings.update_settings(newton_max_iter=1)
    try:
        with pytest.raises(TiltSolveError):
            NormalMinusExpSumModel(1).increment_tilt(40.0)
    finally:
        settings.update_settings(newton_max_iter=previous)


def test_increment_tilted_sample_mean(increment_model, rng):
    theta = np.array([pytest.THETA_A])
    draws = increment_model.sample_tilted(theta, rng, 20000)
    assert draws.shape == (20000, 1)
    # tilting at theta_a centres S_m on a m = 15
    assert draws.mean() == pytest.approx(15.0, abs=0.15)


def test_increment_tilt_near_domain_edge(increment_model):
    theta = increment_model.increment_tilt(-1e6)
    assert -1.0 < theta < -1.0 + 1e-5
    assert increment_model.increment_cgf_grad(theta) == pytest.approx(-1e6, rel=1e-9)


# Test I(y) = s_y^T y - mu(s_y) with grad mu(s_y) = y over random levels
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gaussian_legendre_duality(correlated, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    for y in rng.normal(0.0, 3.0, size=(20, 2)):
        s = correlated.tilt_param(y)
        assert np.allclose(correlated.cgf_grad(s), y, atol=1e-12 * (1 + np.linalg.norm(y)))
        assert correlated.rate(y) == pytest.approx(s @ y - correlated.cgf(s), rel=1e-10, abs=1e-12)
        assert np.allclose(correlated.newton_tilt(y), s, atol=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_increment_legendre_duality(increment_model, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    for level in rng.uniform(-4.0, 6.0, size=20):
        y = np.array([increment_model.m * level])
        s = increment_model.tilt_param(y)
        assert increment_model.cgf_grad(s)[0] == pytest.approx(y[0], rel=1e-11, abs=1e-11)
        assert increment_model.rate(y) == pytest.approx(s[0] * y[0] - increment_model.cgf(s), rel=1e-12)
        assert increment_model.rate(y) >= 0.0


@pytest.mark.parametrize("seed", [3, 4])
def test_rate_convexity(correlated, increment_model, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(20):
        t = rng.uniform(0.0, 1.0)
        y1, y2 = rng.normal(0.0, 3.0, size=(2, 2))
        mixed = correlated.rate(t * y1 + (1 - t) * y2)
        assert mixed <= t * correlated.rate(y1) + (1 - t) * correlated.rate(y2) + 1e-9
        z1, z2 = rng.uniform(-30.0, 50.0, size=2)
        mixed = increment_model.rate([t * z1 + (1 - t) * z2])
        assert mixed <= t * increment_model.rate([z1]) + (1 - t) * increment_model.rate([z2]) + 1e-9

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr
from scipy.stats import norm

from redps.bench.oracles import OracleValue, oracle_cache, oracle_iid_sum, oracle_overshoot, oracle_two_tail


def test_two_tail_closed_form():
    value = oracle_two_tail(4.0, 2.0)
    assert value.p_exact == pytest.approx(3.167124e-5, rel=1e-6)
    assert value.p_exact == pytest.approx(ndtr(-4.0) + ndtr(-8.0), rel=1e-14)
    assert value.method == "closed_form_tail"
    assert value.relative_error < 1e-14


def test_two_tail_nearly_symmetric():
    value = oracle_two_tail(4.0, 1.01)
    # p2 / p1 = Phibar(4.04) / Phibar(4)
    assert value.p_exact / ndtr(-4.0) - 1.0 == pytest.approx(0.84, abs=0.01)


def test_two_tail_far_left_tail():
    assert oracle_two_tail(3.0, 1e3).p_exact == pytest.approx(ndtr(-3.0), rel=1e-15)


def test_two_tail_rejects_bad_arguments():
    with pytest.raises(ValueError):
        oracle_two_tail(-1.0, 2.0)
    with pytest.raises(ValueError):
        oracle_two_tail(2.0, 0.5)


def test_oracle_values_are_cached():
    first = oracle_two_tail(2.5, 2.0)
    assert oracle_two_tail(2.5, 2.0) is first
    assert ("two_tail", 2.5, 2.0) in oracle_cache


def test_oracle_method_validation():
    with pytest.raises(ValueError):
        OracleValue(p_exact=0.1, method="guess", est_abs_error=0.0)


# Test the gamma-normal quadrature against the magnitude of the m = 10 benchmark
def test_iid_sum_m10():
    value = oracle_iid_sum(10, 1.5)
    assert 7.9e-3 < value.p_exact < 8.5e-3
    assert value.relative_error <= 1e-6
    assert value.method == "gamma_normal_quadrature"


def test_iid_sum_single_increment():
    # P(|A - B| >= 1.5) with A ~ N(1.5, 1), B ~ Exp(1), integrated over b directly
    def integrand(b):
        return math.exp(-b) * (ndtr(-b) + ndtr(b - 3.0))

    expected = quad(integrand, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert oracle_iid_sum(1, 1.5).p_exact == pytest.approx(expected, rel=1e-6)


def test_iid_sum_log_slope():
    # -log p / m drifts towards the right-tail rate as m grows
    slopes = [-math.log(oracle_iid_sum(m, 1.5).p_exact) / m for m in (50, 100, 200)]
    assert all(slope < pytest.RATE_A + 0.1 for slope in slopes)
    assert abs(slopes[-1] - pytest.RATE_A) < abs(slopes[0] - pytest.RATE_A)


def test_overshoot_single_step():
    value = oracle_overshoot(1, 3.3, 0.5)
    assert value.p_exact == pytest.approx(ndtr(-6.6), rel=1e-12)


# Test two steps against a direct integral over the first step
def test_overshoot_two_steps():
    def integrand(x):
        return norm.pdf(x) * ndtr(-(1.0 - x))

    crossing_later = quad(integrand, -np.inf, 1.0, epsabs=0, epsrel=1e-12)[0]
    expected = ndtr(-1.0) + crossing_later
    assert oracle_overshoot(2, 1.0, 1.0).p_exact == pytest.approx(expected, rel=1e-4)


def test_overshoot_grows_with_horizon():
    values = [oracle_overshoot(T, 3.3, 1.0).p_exact for T in (1, 3, 5)]
    assert values[0] < values[1] < values[2]
    # union bound over the partial sums
    assert values[2] <= sum(ndtr(-3.3 / math.sqrt(m)) for m in range(1, 6))


def test_overshoot_rejects_long_horizons():
    with pytest.raises(ValueError):
        oracle_overshoot(51, 3.3, 0.2)
    with pytest.raises(ValueError):
        oracle_overshoot(5, 3.3, 0.0)

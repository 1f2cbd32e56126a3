import math

import pandas as pd
import pytest
from scipy.special import ndtr

from redps.bench import (
    build_config,
    load_experiment_config,
    report_efficiency_profile,
    run_experiment,
    search_dominating,
    write_csv,
)
from redps.bench.experiments import CSV_COLUMNS, build_problems, dominating_for, two_tail_delta_bound
from redps.bench.oracles import oracle_two_tail
from redps.cache.utils import compute_dict_hash, memoize_dict
from redps.inference import log_second_moment_exact_two_tail
from redps.settings import Settings
from redps.utils.exceptions import ConfigError, VacuousBoundError


# Test configuration errors carry field paths
@pytest.mark.parametrize(
    "data, path",
    [
        ({"experiment": "two_tail", "n": 1}, "estimation.n"),
        ({"experiment": "iid_sum", "estimator": "is_all"}, "estimation.estimator"),
        ({"experiment": "two_tail", "estimator": "is_k"}, "estimation.k"),
        ({"experiment": "two_tail", "alpha": 1.5}, "estimation.alpha"),
        ({"experiment": "two_tail", "seeds": []}, "estimation.seeds"),
        ({"experiment": "custom_polyhedral"}, "set.polyhedral_file"),
        ({"experiment": "delta_sweep", "replications": 5}, "estimation.replications"),
        ({"experiment": "overshoot", "bound": True}, "estimation.bound"),
        ({"experiment": "nonsense"}, "experiment"),
        ({"experiment": "two_tail", "colour": "red"}, "colour"),
    ],
)
def test_config_errors(data, path):
    with pytest.raises(ConfigError) as exc_info:
        build_config(data)
    assert any(error.startswith(path) for error in exc_info.value.errors)


def test_config_defaults():
    config = build_config({"experiment": "overshoot"})
    assert config.a == 3.3
    assert config.C == 1.5
    assert config.seeds == [0]
    assert config.n == 100_000
    iid_sum = build_config({"experiment": "iid_sum", "estimator": "beta_hat"})
    assert iid_sum.a == 1.5
    assert iid_sum.n == 1_000_000


def test_config_spec_parsing():
    config = build_config({"experiment": "overshoot", "estimator": "is_k", "k": "1..3,7", "sigma": "0.2,0.3"})
    assert config.k == [1, 2, 3, 7]
    assert config.sigma == [0.2, 0.3]
    assert build_config({"experiment": "two_tail", "seeds": "4,5"}).seeds == [4, 5]


def test_load_config_file_with_overrides():
    config = load_experiment_config(str(pytest.TWO_TAIL_CONFIG_PATH), {"n": 500, "gamma": None})
    assert config.experiment == "two_tail"
    assert config.gamma == [3.0]
    assert config.k == [1, 2]
    assert config.n == 500
    assert config.seeds == [3]


def test_load_config_resolves_set_file():
    config = load_experiment_config(str(pytest.CORNER_CONFIG_PATH))
    assert config.polyhedral_file == str(pytest.CORNER_SET_PATH)
    assert math.isinf(config.C)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(str(tmp_path / "absent.yaml"))


def test_settings_validation():
    with pytest.raises(ValueError):
        Settings(default_C=1.0)
    with pytest.raises(ValueError):
        Settings(chunk_size=0)


def test_config_hash_ignores_output_location():
    base = build_config({"experiment": "two_tail"}).dict()
    moved = dict(base, output="elsewhere.csv", threads=8)
    changed = dict(base, n=5)
    assert compute_dict_hash(base) == compute_dict_hash(moved)
    assert compute_dict_hash(base) != compute_dict_hash(changed)


def test_memoize_dict():
    calls = []

    @memoize_dict(maxsize=2)
    def square(payload):
        calls.append(payload["x"])
        return payload["x"] ** 2

    assert square({"x": 3}) == 9
    assert square({"x": 3}) == 9
    assert calls == [3]
    square({"x": 4})
    square({"x": 5})
    assert len(square.cache) == 2
    square({"x": 3})
    assert calls == [3, 4, 5, 3]
    square.clear_cache()
    assert len(square.cache) == 0


def test_dominating_search_is_reused():
    config = build_config({"experiment": "two_tail", "gamma": 4.0})
    problem = build_problems(config)[0]
    first = dominating_for(problem.model, problem.union, math.inf, 100)
    second = dominating_for(problem.model, problem.union, math.inf, 100)
    assert first is second
    assert len(search_dominating.cache) == 1


# Test a k sweep produces one row per k with the fixed columns
def test_run_two_tail_k_sweep(tmp_path):
    config = build_config(
        {"experiment": "two_tail", "gamma": 3.0, "estimator": "is_k", "k": "1..2", "n": 4000, "seeds": [3]}
    )
    result = run_experiment(config)
    assert [row["k_used"] for row in result.rows] == [1, 2]
    assert all(row["r_found"] == 2 for row in result.rows)
    full = result.rows[1]
    assert abs(full["p_hat"] - full["oracle_p"]) <= 4 * math.sqrt(full["v_n"] / full["n"])
    assert full["eb_lo"] <= full["clt_lo"] <= full["p_hat"] <= full["clt_hi"] <= full["eb_hi"]
    assert result.summary["cells"] == 2
    assert result.dominating["k"] == 2

    path = write_csv(result.rows, tmp_path / "rows.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns[: len(CSV_COLUMNS)]) == CSV_COLUMNS
    assert "config_hash" in frame.columns
    assert len(frame) == 2


def test_run_is_reproducible():
    config = build_config({"experiment": "two_tail", "gamma": 3.0, "n": 2000, "seeds": [1, 2]})
    first = run_experiment(config)
    again = run_experiment(config)
    assert first.rows[0]["p_hat"] == again.rows[0]["p_hat"]
    assert first.rows[0]["seed_count"] == 2
    assert first.rows[0]["seeds"] == "1,2"
    assert first.config_hash == again.config_hash


def test_run_iid_sum_beta_hat():
    config = build_config(
        {"experiment": "iid_sum", "estimator": "beta_hat", "m": 5, "n": 5000, "seeds": [7]}
    )
    row = run_experiment(config).rows[0]
    assert row["stop_reason"] == "closed_form"
    assert row["k_used"] == 2
    assert abs(row["p_hat"] - row["oracle_p"]) <= 4 * math.sqrt(row["v_n"] / row["n"])


def test_run_overshoot_all_points():
    config = build_config(
        {"experiment": "overshoot", "T": 5, "sigma": 1.0, "estimator": "is_all", "C": math.inf, "n": 20000}
    )
    row = run_experiment(config).rows[0]
    assert row["k_used"] == 5
    assert row["stop_reason"] == "exhausted"
    assert abs(row["p_hat"] - row["oracle_p"]) <= 4 * math.sqrt(row["v_n"] / row["n"])


def test_run_custom_polyhedral():
    config = load_experiment_config(str(pytest.CORNER_CONFIG_PATH), {"reference_n": 20000})
    row = run_experiment(config).rows[0]
    assert row["k_used"] == 2
    assert row["oracle_p"] is not None
    assert row["hits_e2"] == 0


def test_run_synthetic_halfspaces():
    config = build_config(
        {"experiment": "synthetic_halfspaces", "d": 5, "count": 8, "rate_low": 2.0, "rate_high": 6.0, "n": 2000}
    )
    row = run_experiment(config).rows[0]
    assert 1 <= row["k_used"] <= row["r_found"]
    assert row["stop_reason"] in ("exhausted", "stopped_early")


# Test a single tilt on a nearly symmetric set misses about half of p
def test_two_tail_replications_underestimate():
    config = build_config(
        {
            "experiment": "two_tail",
            "gamma": 4.0,
            "k_tail": 1.01,
            "estimator": "is_k",
            "k": 1,
            "n": 1000,
            "replications": 20,
        }
    )
    row = run_experiment(config).rows[0]
    assert row["reps_without_e2_hits"] >= 19
    assert 0.35 < row["delta_0.05"] < 0.6
    assert row["median_ratio"] == pytest.approx(0.54, abs=0.06)


def test_ci_coverage_cells():
    config = build_config(
        {"experiment": "ci_coverage", "gamma": 3.0, "n": 2000, "replications": 20, "estimator": "is_all"}
    )
    row = run_experiment(config).rows[0]
    assert row["k_used"] == 2
    assert row["coverage_eb"] >= 0.9
    assert 0.0 <= row["coverage_clt"] <= 1.0


def test_two_tail_delta_bound():
    with pytest.raises(VacuousBoundError):
        two_tail_delta_bound(1.0, 1.5, 100, 0.05)
    value = two_tail_delta_bound(4.0, 2.0, 10000, 0.05)
    # the left-tail share p2 / p is a floor for the bound
    assert math.isfinite(value)
    assert value > ndtr(-8.0) / oracle_two_tail(4.0, 2.0).p_exact


def _profile_rows(estimator, k_tail, deltas, asym=None):
    rows = []
    for gamma, delta in zip((2.0, 3.0, 4.0), deltas):
        rows.append(
            {
                "estimator": estimator,
                "params": f"gamma={gamma}",
                "rarity": gamma,
                "n": int(1000 * gamma**2),
                "oracle_p": oracle_two_tail(gamma, k_tail).p_exact,
                "rel_err": 0.1,
                "delta_0.05": delta,
                "asym_eff": asym,
            }
        )
    return rows


def test_efficiency_profile_flags():
    rows = _profile_rows("is_k1", 3.0, [0.2, 0.1, 0.05]) + _profile_rows("crude", 3.0, [1.0, 1.0, 1.0])
    profile = report_efficiency_profile(rows, 0.05, k_tail=3.0)
    flags = {entry.estimator: (entry.ae_consistent, entry.pe_consistent) for entry in profile.estimators}
    assert flags == {"is_k1": (True, True), "crude": (False, False)}
    ratios = [point.asym_eff for point in profile.estimators[0].points]
    assert ratios[-1] == pytest.approx(
        log_second_moment_exact_two_tail(4.0, 3.0) / math.log(oracle_two_tail(4.0, 3.0).p_exact)
    )


def test_efficiency_profile_probabilistic_only():
    rows = _profile_rows("is_k1", 2.0, [0.3, 0.2, 0.1])
    entry = report_efficiency_profile(rows, 0.05, k_tail=2.0).estimators[0]
    assert not entry.ae_consistent
    assert entry.pe_consistent


def test_efficiency_profile_needs_grid():
    rows = _profile_rows("is_k1", 3.0, [0.2, 0.1, 0.05])[:2]
    with pytest.raises(ConfigError):
        report_efficiency_profile(rows, 0.05, k_tail=3.0)

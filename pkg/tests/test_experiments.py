import math

import numpy as np
import pytest

from uaroots.experiments import (COLUMNS, ExperimentConfig, TrialTable, calibrate_nx_constant,
                                 exponent_trend, fit_scaling, map_trials, nx_counts,
                                 run_error_curve, run_nx_tail, run_phi_tail, run_weight_tail,
                                 weight_tail_bound)
from uaroots.stats import linear_fit, loglog_slope, wilson_interval


def _draw(args, rng):
    return float(rng.random())


def test_map_trials_is_schedule_invariant():
    a = map_trials(_draw, None, 37, seed=5, workers=1)
    b = map_trials(_draw, None, 37, seed=5, workers=3)
    assert a == b
    assert a != map_trials(_draw, None, 37, seed=6)


def test_error_curve_reproducible_across_workers():
    cfg = dict(model="UA", n_grid=[60], K_grid=[1, 2, 4, 60], trials=40, seed=3)
    t1 = run_error_curve(ExperimentConfig(**cfg, workers=1))
    t2 = run_error_curve(ExperimentConfig(**cfg, workers=2))
    assert t1 == t2
    errs = [r["value"] for r in t1.where(statistic="error")]
    assert errs == sorted(errs, reverse=True)
    assert t1.get(statistic="error", K=60)["value"] == 0


def test_error_curve_full_output_regular():
    # d*n + 2 nodes: K at least that many always contains the root
    cfg = ExperimentConfig(model="UA_regular", d=2, n_grid=[10], K_grid=[1, 22], trials=30)
    t = run_error_curve(cfg)
    assert t.get(statistic="error", K=22)["value"] == 0
    lo = t.get(statistic="wilson_low", K=1)["value"]
    hi = t.get(statistic="wilson_high", K=1)["value"]
    err = t.get(statistic="error", K=1)["value"]
    assert lo <= err <= hi


def test_phi_tail_trivial_tree():
    t = run_phi_tail(ExperimentConfig(experiment="phi-tail", n_grid=[1], x_grid=[2, 4],
                                      trials=5))
    assert all(r["value"] == 0 for r in t.where(statistic="tail"))
    assert t.get(statistic="mean_log_phi")["value"] == 0


def test_weight_tail_rows():
    assert weight_tail_bound("UA", 8, 0.3) == pytest.approx(0.3 ** -2 * (2 / 3) ** 7)
    assert weight_tail_bound("UA_regular", 10, 0.3, 2) == pytest.approx(
        1.5 * 3 * 0.3 ** -2 * (2 / 3) ** 10)
    t = run_weight_tail(ExperimentConfig(model="UA", n_grid=[200], m_grid=[1, 8], trials=50))
    rows = t.where(statistic="weight_tail")
    assert [r["y"] for r in rows] == [1, 8]
    assert rows[0]["value"] == 1.0  # the root's first child chain reaches weight 1
    assert all(r["bound"] is not None for r in rows)


def test_nx_tail_rows_and_calibration():
    counts = nx_counts("UA", [1, 10], 30, seed=2)
    assert (counts[:, 0] == 1).all()
    assert (counts[:, 1] >= 1).all()
    c = calibrate_nx_constant("UA", [10], [1], trials=30, seed=2)
    assert c > 0
    t = run_nx_tail(ExperimentConfig(experiment="nx-tail", x_grid=[1, 10], y_grid=[1],
                                      trials=30, seed=9))
    assert t.get(statistic="exceedance", x=1, y=1)["value"] == 0
    assert t.get(statistic="c_hat")["value"] == pytest.approx(0.6611)


def test_csv_schema_and_round_trip(tmp_path):
    t = TrialTable()
    t.add(experiment="e", model="UA", statistic="s", value=0.25, trials=10, seed=1,
          **{"pass": True})
    t.add(experiment="e", model="UA", K=4, statistic="s", value=np.float64(0.5))
    text = t.to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert lines[1].count(",") == len(COLUMNS) - 1
    assert ",,," in lines[1]  # blank fields kept in place
    back = TrialTable.from_csv(text)
    assert back == t
    assert TrialTable.from_json(t.to_json()) == t
    path = tmp_path / "t.csv"
    t.write(str(path))
    assert path.read_text() == text
    with pytest.raises(KeyError):
        t.add(bogus=1)
    assert not TrialTable([{"pass": False}]).all_pass


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(K_grid=[])
    with pytest.raises(ValueError):
        ExperimentConfig(model="UA_regular")
    with pytest.raises(ValueError):
        ExperimentConfig.from_mapping({"colour": 1})
    cfg = ExperimentConfig.from_mapping({"n-grid": [5], "trials": 3}, trials=7, seed=None)
    assert cfg.n_grid == [5] and cfg.trials == 7
    assert ExperimentConfig.from_mapping(cfg.to_dict()) == cfg


def test_fit_scaling_synthetic():
    eps = np.array([0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.001])
    K = np.exp(2 * np.sqrt(np.log(1 / eps)))
    t = TrialTable()
    for k, e in zip(K, eps):
        t.add(experiment="error-curve", n=100, K=float(k), statistic="error", value=float(e))
    fit = fit_scaling(t)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(0.0, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.C_hat == pytest.approx(1.0)
    ks, ratio, trend = exponent_trend(t)
    assert trend < 0


def test_fit_scaling_errors():
    with pytest.raises(ValueError):
        fit_scaling(TrialTable())
    t = TrialTable()
    for k, e in ((1, 0.5), (2, 0.5), (4, 0.0)):
        t.add(K=k, statistic="error", value=e)
    with pytest.raises(ValueError):
        fit_scaling(t)


def test_stats_helpers():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0 and 0 < hi < 0.35
    slope, intercept, r2, resid = linear_fit([0, 1, 2], [1, 3, 5])
    assert (slope, intercept) == pytest.approx((2, 1)) and r2 == pytest.approx(1)
    x = np.array([2.0, 4, 8, 16])
    assert loglog_slope(x, 3 * x ** -1.5) == pytest.approx(-1.5)
    # zero tails are dropped rather than logged
    assert loglog_slope([2, 4, 8, 16], [0.5, 0.25, 0.125, 0.0]) == pytest.approx(-1.0)
    assert math.isnan(loglog_slope([2, 4], [0.0, 0.0]))

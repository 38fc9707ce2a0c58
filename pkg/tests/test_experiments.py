import math

import numpy as np
import pytest

from phaselab import experiments as ex


def quick_config(**kw):
    defaults = dict(
        nbar=1.0,
        nu_rule=ex.NuRule("constant", 0.05),
        trials=2000,
        campaign_seed=314159,
    )
    defaults.update(kw)
    return ex.CampaignConfig(**defaults)


def test_nu_rule():
    assert ex.NuRule("constant", 0.05).nu_for(4.0) == 0.05
    assert ex.NuRule("reciprocal", 0.05).nu_for(4.0) == pytest.approx(0.0125)
    with pytest.raises(ValueError):
        ex.NuRule("linear", 0.05)
    with pytest.raises(ValueError):
        ex.NuRule("constant", 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        quick_config(trials=5)
    with pytest.raises(ValueError):
        quick_config(m=0)
    with pytest.raises(ValueError):
        quick_config(nbar=-1.0)
    with pytest.raises(ValueError):
        quick_config(mode="bogus")


def test_campaign_deterministic():
    a = ex.run_campaign(quick_config())
    b = ex.run_campaign(quick_config())
    assert np.array_equal(a.phi_hats, b.phi_hats)
    assert a.rmse == b.rmse
    c = ex.run_campaign(quick_config(campaign_seed=1))
    assert not np.array_equal(a.phi_hats, c.phi_hats)


def test_campaign_rmse_near_prediction():
    # the single-shot estimator explains an outcome by sliding the narrow
    # peak onto it, so rmse tracks rms(x)/ybar ~ nu/sqrt(2 nbar)
    res = ex.run_campaign(quick_config(trials=5000))
    predicted = 0.0349
    assert abs(res.rmse - predicted) / predicted < 0.05
    assert res.boundary_fraction < 0.01
    assert res.reliable
    assert res.heisenberg == pytest.approx(0.5)
    assert res.cr_bound == pytest.approx(0.025)


def test_campaign_workers_match_serial():
    serial = ex.run_campaign(quick_config(trials=600))
    parallel = ex.run_campaign(quick_config(trials=600, workers=2))
    assert np.array_equal(serial.phi_hats, parallel.phi_hats)
    assert serial.rmse == parallel.rmse


def test_jackknife_matches_bruteforce():
    rng = np.random.default_rng(5)
    values = rng.normal(size=200)
    n = values.size
    # delete-one rmse with the same 1/(n-1) convention as the implementation
    rmse_i = []
    for i in range(n):
        rest = np.delete(values, i)
        m = rest.mean()
        rmse_i.append(math.sqrt(np.sum((rest - m) ** 2) / (n - 1)))
    rmse_i = np.array(rmse_i)
    expected = math.sqrt((n - 1) / n * np.sum((rmse_i - rmse_i.mean()) ** 2))
    assert ex.jackknife_rmse_stderr(values) == pytest.approx(expected, rel=1e-10)


def test_convergence_trace_prefix_property():
    cfg = quick_config()
    res = ex.run_campaign(cfg)
    trace = ex.convergence_trace(cfg, [100, 500, 2000], result=res)
    assert trace[-1][1] == pytest.approx(res.rmse, rel=1e-12)
    prefix = res.phi_hats[:100]
    assert trace[0][1] == pytest.approx(
        math.sqrt(np.mean((prefix - prefix.mean()) ** 2)), rel=1e-12
    )


def test_convergence_trace_validation():
    cfg = quick_config()
    res = ex.run_campaign(cfg)
    with pytest.raises(ValueError):
        ex.convergence_trace(cfg, [500, 100, 2000], result=res)
    with pytest.raises(ValueError):
        ex.convergence_trace(cfg, [100, 500], result=res)


def test_trace_flatness():
    trace = [(100, 0.04), (500, 0.035), (1000, 0.0349), (5000, 0.0351), (10000, 0.035)]
    # last decade spans 1000..10000
    expected = max(abs(0.0349 - 0.035), abs(0.0351 - 0.035)) / 0.035
    assert ex.trace_flatness(trace) == pytest.approx(expected)


def test_seed_stability():
    r1 = ex.run_campaign(quick_config(trials=20000, campaign_seed=11))
    r2 = ex.run_campaign(quick_config(trials=20000, campaign_seed=22))
    tol = 3.0 * math.hypot(r1.std_error_of_rmse, r2.std_error_of_rmse)
    assert abs(r1.rmse - r2.rmse) <= tol


def test_scaling_study_reciprocal():
    fit = ex.scaling_study([1.0, 2.0, 3.0], c=0.05, trials=20000, campaign_seed=77)
    assert 1.35 <= fit.exponent <= 1.65
    assert 0.025 <= fit.prefactor <= 0.045
    assert fit.exponent_error < 0.05
    assert len(fit.points) == 3


def test_scaling_study_constant_nu_exponent():
    # the m=1 estimator does not attain the Cramer-Rao floor, so at fixed nu
    # the uncertainty decays like 1/sqrt(nbar), not 1/nbar
    fit = ex.scaling_study(
        [1.0, 2.0, 3.0], c=0.05, trials=20000, campaign_seed=78, nu_rule_kind="constant"
    )
    assert 0.4 <= fit.exponent <= 0.6


def test_scaling_study_validation():
    with pytest.raises(ValueError):
        ex.scaling_study([1.0, 2.0], c=0.05, trials=1000)
    with pytest.raises(ValueError):
        ex.scaling_study([0.5, 1.0, 2.0], c=0.05, trials=1000)


def test_bound_table_columns():
    rows = ex.bound_table(nbars=(1.0, 2.0, 3.0, 4.0, 5.0), trials=2000, campaign_seed=3)
    assert [r.heisenberg for r in rows] == pytest.approx([0.5, 0.25, 1 / 6, 0.125, 0.1])
    assert [r.cr_bound for r in rows] == pytest.approx([0.025, 0.0125, 0.05 / 6, 0.00625, 0.005])
    for r in rows:
        assert r.rmse < r.heisenberg
        assert r.rmse > r.cr_bound - 3.0 * r.std_error_of_rmse


def test_repetitions_degrade_heisenberg_ratio():
    # the Heisenberg bound falls like 1/m but the single-peak estimator
    # cannot pool repetitions that fast (at small m the peak explains only
    # the largest outcome and the rmse even grows), so the ratio of the
    # uncertainty to the bound rises steadily with m
    r1 = ex.run_campaign(quick_config(trials=3000, m=1))
    r4 = ex.run_campaign(quick_config(trials=3000, m=4))
    r16 = ex.run_campaign(quick_config(trials=1500, m=16))
    ratios = [r.rmse / r.heisenberg for r in (r1, r4, r16)]
    assert ratios[0] < ratios[1] < ratios[2]
    assert r16.rmse > r16.heisenberg / 3.0  # nowhere near 1/sqrt(m) pooling


def test_boundary_flagging_unreliable():
    res = ex.run_campaign(quick_config(trials=500, window=0.004))
    assert res.boundary_fraction > 0.05
    assert not res.reliable


def test_csv_writers_deterministic(tmp_path):
    rows = ex.bound_table(nbars=(1.0,), trials=500, campaign_seed=9)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    ex.write_table_csv(p1, rows, timestamp=False)
    ex.write_table_csv(p2, rows, timestamp=False)
    assert p1.read_bytes() == p2.read_bytes()
    header, line = p1.read_text().splitlines()
    assert header == "nbar,mean_estimate,rmse,rmse_stderr,heisenberg,cr_bound"
    fields = line.split(",")
    assert float(fields[0]) == 1.0
    assert float(fields[4]) == 0.5


def test_scaling_outputs(tmp_path):
    fit = ex.scaling_study([1.0, 2.0, 3.0], c=0.05, trials=1000, campaign_seed=4)
    csv_path = tmp_path / "scaling.csv"
    json_path = tmp_path / "fit.json"
    ex.write_scaling_csv(csv_path, fit, timestamp=False)
    ex.write_scaling_fit_json(json_path, fit)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "nbar,NT,rmse,stderr"
    assert len(lines) == 4
    import json

    record = json.loads(json_path.read_text())
    assert record["exponent"] == pytest.approx(fit.exponent)
    assert len(record["points"]) == 3


def test_convergence_csv(tmp_path):
    cfg = quick_config(trials=1000)
    res = ex.run_campaign(cfg)
    trace = ex.convergence_trace(cfg, [100, 1000], result=res)
    path = tmp_path / "conv.csv"
    ex.write_convergence_csv(path, trace, timestamp=False)
    lines = path.read_text().splitlines()
    assert lines[0] == "trials,rmse"
    assert lines[2].startswith("1000,")

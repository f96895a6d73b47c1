import math

import pytest

import secfield


def test_linear_overlap_is_partial_at_moderate_rate():
    sol = secfield.solve_overlap(rate=1.8, sigma_sq=0.1, power=1.0, order=1)
    assert 0.0 < sol["m_star"] < 1.0
    assert sol["fixed_point_residual"] < 1e-8


def test_cubic_scan_has_two_regimes():
    points = secfield.scan_rates(1.6, 1.9, 0.1, sigma_sq=0.1, order=3)
    assert [round(p["rate"], 12) for p in points] == [1.6, 1.7, 1.8, 1.9]
    assert points[0]["m_star"] > 1 - 1e-6
    assert points[-1]["m_star"] == 0.0


def test_critical_rate_near_heuristic():
    located = secfield.locate_critical_rate(1.5, 2.0, sigma_sq=0.1, order=3)
    assert abs(located - secfield.critical_rate_heuristic(1.0, 0.1)) < 0.05


def test_linear_field_has_no_jump():
    with pytest.raises(secfield.BracketError):
        secfield.locate_critical_rate(1.5, 2.5, sigma_sq=0.1, order=1)


def test_capacities():
    assert secfield.awgn_capacity(1.0) == pytest.approx(0.5 * math.log(2.0))
    cs = secfield.secrecy_capacity(power=1.0, sigma_b_sq=0.1, sigma_e_sq=1.0)
    assert cs == pytest.approx(0.5 * math.log(11.0) - 0.5 * math.log(2.0))
    assert secfield.key_length(16, 1.0, 1.0) == 8


def test_field_and_mmse_noiseless():
    field = secfield.sample_field(n_out=12, dim=4, order=3, seed=7)
    s = [1.0, -1.0, -1.0, 1.0]
    y = field.evaluate(s)
    assert len(y) == 12
    r, log_z = secfield.mmse(field, y, 1e-6)
    assert [math.copysign(1.0, v) for v in r] == s
    assert math.isfinite(log_z)


def test_bad_input_raises():
    field = secfield.sample_field(n_out=2, dim=3, seed=1)
    with pytest.raises(secfield.InputError):
        field.evaluate([1.0, 0.5, -1.0])
    with pytest.raises(ValueError):
        field.evaluate([1.0, 1.0])


def test_experiment_and_leakage():
    cfg = secfield.CodecConfig()
    cfg.n, cfg.k, cfg.order = 16, 4, 3
    cfg.sigma_b_sq, cfg.sigma_e_sq = 0.01, 1.0
    rep = secfield.run_experiment(cfg, 4, leakage_samples=20)
    assert rep["n_trials"] == 4 and len(rep["trials"]) == 4
    assert rep["k_tilde"] == cfg.k_tilde() == 8
    assert rep["all_bounds_ok"]
    assert rep["leakage"]["n_samples"] == 20
    leak = secfield.estimate_leakage(cfg, 20)
    assert abs(leak["chain_residual"]) < 1e-10


def test_budget_error():
    cfg = secfield.CodecConfig()
    cfg.n, cfg.k = 64, 30
    with pytest.raises(secfield.ResourceError):
        secfield.run_experiment(cfg, 1)

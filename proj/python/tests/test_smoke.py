import math

import numpy as np
import pytest

import sparsepr as sp


def test_signal_and_measurements():
    sig = sp.generate_signal(200, 4, seed=3)
    assert sig.k == 4
    assert math.isclose(sig.norm, 1.0, rel_tol=1e-12)
    meas = sp.generate_measurements(sig, 100, seed=3)
    a = meas.sensing
    assert a.shape == (100, 200)
    np.testing.assert_allclose(meas.observations, (a @ sig.values) ** 2, rtol=1e-12)


def test_gradient_matches_numpy():
    sig = sp.generate_signal(30, 3, seed=1)
    meas = sp.generate_measurements(sig, 40, seed=1)
    a, y = meas.sensing, meas.observations
    x = np.linspace(-1.0, 1.0, 30)
    q = a @ x
    np.testing.assert_allclose(sp.empirical_gradient(x, meas), a.T @ ((q**2 - y) * q) / 40, rtol=1e-12)
    assert math.isclose(sp.empirical_risk(x, meas), np.mean((q**2 - y) ** 2) / 4, rel_tol=1e-12)
    assert sp.empirical_risk(sig.values, meas) == 0.0


def test_bregman_example():
    m = sp.HypentropyMap(1.0)
    value = sp.bregman(m, np.array([1.0]), np.array([0.0]))
    assert math.isclose(value, 1 - math.sqrt(2) + math.log(1 + math.sqrt(2)), rel_tol=1e-14)
    assert sp.dist(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == 0.0


def test_errors_are_python_exceptions():
    sig = sp.generate_signal(10, 2, seed=1)
    meas = sp.generate_measurements(sig, 5, seed=1)
    with pytest.raises(ValueError):
        sp.empirical_risk(np.zeros(3), meas)
    with pytest.raises(ValueError):
        sp.run_beta_sweep({"n": 0})


def test_hwf_recovers_small_instance():
    sig = sp.generate_signal(200, 3, seed=20)
    meas = sp.generate_measurements(sig, 400, seed=20)
    cfg = sp.SolverConfig()
    cfg.max_steps = 2000
    cfg.stop_tol = 1e-3
    out = sp.run(meas, sig, cfg, sp.estimate_support_coordinate(meas))
    assert out["failure"] is None
    assert sp.dist(out["x"], sig.values) <= 1e-3
    traj = out["trajectory"]
    assert traj["step"][0] == 0
    assert traj["rel_dist"][-1] <= 1e-3
    assert out["stages"].t1_step is not None
    assert out["audit_passed"]


def test_beta_sweep_summary(tmp_path):
    csv = sp.run_beta_sweep(
        {"n": 100, "k": 2, "m": 150, "beta_grid": "1e-6,1e-10", "max_steps": 50, "output_dir": str(tmp_path)}
    )
    lines = csv.strip().split("\n")
    assert lines[0] == "n,k,m,beta,trials,successes,median_final_rel_dist,median_t1_step,audit_pass_rate"
    assert len(lines) == 3
    assert (tmp_path / "summary_beta.csv").exists()

import json
import math

import numpy as np
import pytest

import ptqm


def test_two_level_frame_and_spectrum():
    alpha = math.pi / 3
    frame = ptqm.two_level.frame(alpha)
    assert frame.pc_eigenvalues == pytest.approx([2 - math.sqrt(3), 2 + math.sqrt(3)], abs=1e-12)
    lower, upper = frame.norm_bounds()
    assert lower == pytest.approx(math.sqrt(2 - math.sqrt(3)), abs=1e-12)
    assert upper == pytest.approx(math.sqrt(2 + math.sqrt(3)), abs=1e-12)

    values, vectors = ptqm.eigenpairs(ptqm.two_level.hamiltonian(1.0, alpha))
    assert values.real == pytest.approx([0.0, 1.0], abs=1e-12)
    psi = ptqm.two_level.eigenvectors(alpha)
    gram = np.array([[frame.inner(psi[:, i], psi[:, j]) for j in range(2)] for i in range(2)])
    assert np.allclose(gram, np.eye(2), atol=1e-12)


def test_norm_sandwich_random_vectors():
    frame = ptqm.two_level.frame(0.7)
    lower, upper = frame.norm_bounds()
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.normal(size=2) + 1j * rng.normal(size=2)
        x /= np.linalg.norm(x)
        q = frame.norm(x)
        assert lower - 1e-12 <= q <= upper + 1e-12


def test_frame_axiom_violation_raises():
    with pytest.raises(ptqm.FrameAxiomError, match="C"):
        ptqm.validate_frames(-ptqm.two_level.c_operator(0.3), ptqm.two_level.parity(), np.eye(2))


def test_run_scenario(tmp_path):
    config = {
        "model": {"preset": "two_level", "s": 1.0, "alpha": {"kind": "linear", "start": 0.0, "end": 0.08}},
        "grid": {"t_start": 0.0, "t_end": 20.0, "points": 501},
        "epsilon": 0.5,
    }
    code, summary = ptqm.run(config, str(tmp_path))
    assert code == 0
    assert summary["adiabatic"]["V_T"] < 0.48
    assert summary["adiabatic"]["max_loss"] < 0.5
    assert summary["evolution"]["norm_drift"] < 1e-8
    assert (tmp_path / "trajectory.csv").exists()
    assert json.loads((tmp_path / "summary.json").read_text())["exit_code"] == 0


def test_config_errors():
    model = {"preset": "two_level", "s": 1.0, "alpha": 0.2}
    with pytest.raises(ptqm.ConfigError, match="/model: missing"):
        ptqm.normalize_config({})
    with pytest.raises(ptqm.ConfigError, match="/epsilon"):
        ptqm.normalize_config({"model": model, "epsilon": 2.0})
    with pytest.raises(ptqm.ConfigError, match="line"):
        ptqm.normalize_config('{"epsilon": ,}')
    full = ptqm.normalize_config({"model": model})
    assert full["equation"] == "metric_compensated"

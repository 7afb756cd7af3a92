import json
import math
from pathlib import Path

import numpy as np
import pytest

import fpqubit as fq

ROOT = Path(__file__).resolve().parents[2]
ZFS = fq.ZfsParams(2.356e9, 0.458e9)


def test_zero_field_levels():
    levels, states = fq.levels(ZFS, [0.0, 0.0, 0.0])
    assert levels == pytest.approx([-2 * ZFS.d / 3, ZFS.d / 3 - ZFS.e, ZFS.d / 3 + ZFS.e], rel=1e-12)
    assert np.allclose(states.conj().T @ states, np.eye(3), atol=1e-12)
    h = fq.hamiltonian(ZFS, [1e-3, 2e-3, 3e-3])
    assert np.allclose(h, h.conj().T)


def test_transitions_at_zero_field():
    freqs = sorted(t["frequency"] for t in fq.transitions(ZFS, [0, 0, 0], [0, 0, 1]))
    assert freqs == pytest.approx([2 * ZFS.e, ZFS.d - ZFS.e, ZFS.d + ZFS.e], rel=1e-12)


def test_powder_spectrum_peaks():
    f, s = fq.synth_spectrum(ZFS, 0.0, 1.5e9, 3.2e9, 2e6, 80e6, n_orient=2000)
    f, s = np.asarray(f), np.asarray(s)
    low = f[f < 2.3e9][np.argmax(s[f < 2.3e9])]
    high = f[f > 2.3e9][np.argmax(s[f > 2.3e9])]
    assert abs(low - 1.898e9) <= 2e6
    assert abs(high - 2.814e9) <= 2e6
    pts = fq.fibonacci_sphere(100)
    assert pts.shape == (100, 3)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


def test_fit_round_trip():
    f, s = fq.synth_spectrum(ZFS, 0.0, 1.0e9, 3.5e9, 10e6, 80e6, n_orient=500)
    rng = np.random.default_rng(3)
    noisy = np.asarray(s) + 0.01 * max(s) * rng.standard_normal(len(s))
    fit = fq.fit_zfs(f, noisy.tolist(), n_orient=500)
    d, sd = fit["params"]["d"]
    assert d == pytest.approx(ZFS.d, rel=5e-3)
    assert sd > 0
    with pytest.raises(fq.ValidationError):
        fq.fit_zfs(f, noisy.tolist(), n_orient=500, init={"spin": 1.0})


def test_coherence_and_relaxation():
    assert fq.filter_function(1, 1.0, 2.0) == pytest.approx(8 * math.sin(0.5) ** 4)
    assert fq.cpmg_chi(0.0, 1e4, 4, 1e-4) == pytest.approx(0.5, rel=0.01)
    t2 = fq.solve_t2(2 / 3, 1e8, 8)
    assert fq.cpmg_chi(2 / 3, 1e8, 8, t2) == pytest.approx(1.0, abs=1e-5)
    assert fq.clock_gamma_eff(7e-3, 0.458e9) == pytest.approx(11.0e9, rel=0.01)
    assert fq.t1_rate(80.0, 43.0, 47e-12) == pytest.approx(4426.0, rel=1e-3)
    assert fq.psd_exponent_from_scaling(0.4) == pytest.approx(2 / 3)
    with pytest.raises(fq.ValidationError):
        fq.cpmg_chi(1.2, 1.0, 1, 1e-5)


def test_photophysics():
    assert "cryo-80K" in fq.photophysics_presets()
    assert fq.oadf_contrast("cryo-80K", "xz") >= 0.40
    assert -0.05 <= fq.oadf_contrast("ambient", "xz") <= -0.02
    run = fq.run_oadf_sequence("cryo-80K", "xz")
    assert np.allclose(run["populations"].sum(axis=1), 1.0, atol=1e-9)
    with pytest.raises(fq.ValidationError):
        fq.oadf_contrast("cryo-80K", "xz", {"k_bogus": 1.0})


def test_sensing():
    assert fq.dipole_field(5e-9, 1.4106e-26) == pytest.approx(22.57e-9, rel=1e-3)
    eta, molar = fq.dc_sensitivity(500.0, 0.03, 1e-3, 100e-6, 2e-6, 1e-6, molecules=1e4)
    eta4, molar4 = fq.dc_sensitivity(500.0, 0.03, 1e-3, 100e-6, 2e-6, 1e-6, molecules=4e4)
    assert eta4 == pytest.approx(eta / 2)
    assert molar4 == pytest.approx(molar)


def test_cli_entry_point(tmp_path):
    code = fq.run_cli(["--config", str(ROOT / "configs" / "t1.yaml"), "--out", str(tmp_path), "t1"])
    assert code == 0
    env = json.loads((tmp_path / "t1.json").read_text())
    assert env["command"] == "t1"
    assert env["payload"]["points"][0]["t1_s"] == pytest.approx(225.95e-6, rel=1e-4)
    assert fq.run_cli(["--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path), "t1"]) == 4

import csv
import json

import numpy as np
import pytest

from pfpoint import amplitudes, cli, model, resolvent


def _run(tmp_path, argv, config=None, name="out"):
    out = tmp_path / name
    args = list(argv) + ["--out", str(out), "--quiet"]
    if config is not None:
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(config)
        args += ["--config", str(cfg)]
    return cli.main(args), out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_poles_default(tmp_path):
    code, out = _run(tmp_path, ["poles"])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["lambda_e"] == pytest.approx(16.726, abs=1e-3)
    assert doc["gamma_e"] == pytest.approx(0.0298, abs=1e-4)
    assert doc["gamma_e_published"] == pytest.approx(0.06, rel=1e-12)
    assert doc["z_plus"]["re"] == pytest.approx(doc["omega_e"])
    assert "discrepancy" in doc


def test_poles_decoupled(tmp_path):
    code, out = _run(tmp_path, ["poles"], "physical.e = 0\n")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["gamma_e"] == 0 and doc["omega_e"] == 1.0
    assert doc["lambda_e"] is None


@pytest.mark.parametrize("text", [
    "physical.e = banana\n",
    "nonsense\n",
    "physical.q = 1\n",
    "grid.spacing = cubic\n",
    "physical.m = -1\n",
    "photon.k = 1, 1, 0\n",
    "tolerance.stone = 0\n",
])
def test_malformed_config(tmp_path, text, capsys):
    code, out = _run(tmp_path, ["poles"], text)
    assert code == 2
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


def test_survival_requires_charge(tmp_path):
    code, out = _run(tmp_path, ["survival"], "physical.e = 0\n")
    assert code == 2 and not out.exists()


def test_survival_single_point_matches_library(tmp_path):
    code, out = _run(tmp_path, ["survival"], "grid.start = 2\ngrid.stop = 2\ngrid.points = 1\ngrid.scale = 1\n")
    assert code == 0
    (row,) = _rows(out)
    p = model.PhysicalParams()
    b = amplitudes.survival_terms(2.0, model.spectrum(p), p)
    assert float(row["t"]) == 2.0
    assert float(row["re_S"]) == b.S.real and float(row["im_S"]) == b.S.imag
    assert float(row["re_j2"]) == b.j2.real
    assert row["flag"] == "ok"


def test_survival_deterministic(tmp_path):
    cfg = "grid.points = 7\n"
    _, a = _run(tmp_path, ["survival"], cfg, "a")
    _, b = _run(tmp_path, ["survival"], cfg, "b")
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()


def test_survival_workers_match_serial(tmp_path):
    _, a = _run(tmp_path, ["survival"], "grid.points = 4\n", "a")
    _, b = _run(tmp_path, ["survival"], "grid.points = 4\nrun.workers = 2\n", "b")
    assert a.read_bytes() == b.read_bytes()


def test_survival_verify(tmp_path):
    code, out = _run(tmp_path, ["survival", "--verify"], "grid.points = 6\n")
    assert code == 0
    rows = _rows(out)
    assert all(float(r["oracle_gap"]) < 1e-5 for r in rows)


def test_survival_gap_tolerance_exit(tmp_path):
    code, out = _run(tmp_path, ["survival", "--verify"], "grid.points = 2\ntolerance.stone = 1e-30\n")
    assert code == 1
    assert all(r["flag"] == "gap" for r in _rows(out))


def test_survival_numeric_failure_flags_row(tmp_path, monkeypatch):
    real = amplitudes.survival_terms

    def flaky(t, *a, **k):
        if t > 1:
            raise amplitudes.AccuracyError("forced")
        return real(t, *a, **k)

    monkeypatch.setattr(amplitudes, "survival_terms", flaky)
    code, out = _run(tmp_path, ["survival"], "grid.points = 3\ngrid.scale = 1\ngrid.start = 0.5\ngrid.stop = 2\n")
    assert code == 3
    assert [r["flag"] for r in _rows(out)] == ["ok", "ok", "error"]


def test_transition_rows(tmp_path):
    code, out = _run(tmp_path, ["transition", "--verify"], "grid.points = 3\nphoton.eps = 0.05\n")
    assert code == 0
    rows = _rows(out)
    assert all(float(r["oracle_gap"]) < 1e-5 for r in rows)


def test_transition_parallel_polarization_is_zero(tmp_path):
    code, out = _run(tmp_path, ["transition"], "grid.points = 3\nbound.zeta = 0, 0, 1\n")
    assert code == 0
    for r in _rows(out):
        assert float(r["re_A"]) == 0.0 and float(r["im_A"]) == 0.0


def test_transition_sweep_peak(tmp_path):
    p = model.PhysicalParams()
    sp = model.spectrum(p)
    code, out = _run(tmp_path, ["transition", "--sweep", "nu:0.8:1.2:401"])
    assert code == 0
    rows = _rows(out)
    nus = np.array([float(r["nu"]) for r in rows])
    vals = np.array([float(r["abs_C3"]) for r in rows])
    assert abs(nus[np.argmax(vals)] - sp.omega_e) <= nus[1] - nus[0]


def test_bad_sweep(tmp_path):
    code, out = _run(tmp_path, ["transition", "--sweep", "nu:2:1:5"])
    assert code == 2 and not out.exists()


def test_verify_passes(tmp_path):
    code, out = _run(tmp_path, ["verify"])
    doc = json.loads(out.read_text())
    assert code == 0, [c for c in doc["checks"] if not c["passed"]]
    assert doc["passed"]
    assert {c["name"] for c in doc["checks"]} >= {"stone_survival", "j2_dual_path", "wavetoy", "cut_integral"}


def test_verify_catches_flipped_q(tmp_path, monkeypatch):
    def q_flipped(z, params, lambda_e):
        z = np.asarray(z, dtype=complex)
        kp = params.alpha / lambda_e**2
        return params.tau * z**2 + 1j * kp * (-z + 1j * lambda_e)

    monkeypatch.setattr(resolvent, "q", q_flipped)
    code, out = _run(tmp_path, ["verify"])
    assert code == 1
    failed = {c["name"] for c in json.loads(out.read_text())["checks"] if not c["passed"]}
    assert "stone_survival" in failed


def test_verify_catches_dropped_subtraction(tmp_path, monkeypatch):
    monkeypatch.setattr(amplitudes, "_j2_subtraction", lambda s, t, lam, r_lam: 0.0 * s)
    code, out = _run(tmp_path, ["verify"])
    assert code == 1
    failed = {c["name"] for c in json.loads(out.read_text())["checks"] if not c["passed"]}
    assert "j2_dual_path" in failed


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "pfpoint", "poles"], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["lambda_e"] > 16

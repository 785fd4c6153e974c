import csv
import io
import json
import math

import numpy as np
import pytest

from geophase.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from geophase.hamiltonian import linear_family, linear_family_to_dict


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def circle(theta0, **kw):
    return {"curve": {"colatitude_circle": {"radius": 1.0, "theta0": theta0, "turns": 1}}, **kw}


def test_phase_equator(capsys):
    code, out, _ = run(capsys, "phase")
    res = json.loads(out)["result"]
    assert code == EXIT_OK
    assert res["theta_solid_angle"] == pytest.approx(-math.pi)
    assert res["exp_match"] < 1e-6


def test_phase_third_circle(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(math.pi / 3))
    code, out, _ = run(capsys, "phase", "--config", cfg)
    res = json.loads(out)["result"]
    assert res["theta_line"] == pytest.approx(1.5 * math.pi, abs=1e-6)
    assert res["theta_line_mod_2pi"] == pytest.approx(-0.5 * math.pi, abs=1e-6)
    assert res["theta_solid_angle"] == pytest.approx(-0.5 * math.pi)
    assert res["exp_match"] < 1e-6


def test_phase_zero_area_loop(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", {"curve": {"samples": [[1, 0, 0.2], [1, 0.2, 0.2], [1, 0, 0.2]]}})
    code, out, _ = run(capsys, "phase", "--config", cfg, "--segments", "64")
    res = json.loads(out)["result"]
    assert code == EXIT_OK
    assert res["theta_line"] == pytest.approx(0, abs=1e-12)
    assert res["theta_solid_angle"] == pytest.approx(0, abs=1e-12)


def test_phase_curve_file(capsys, tmp_path):
    t = np.linspace(0, 2 * np.pi, 401)
    pts = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], 1)
    pts[-1] = pts[0]
    write(tmp_path, "pts.json", pts.tolist())
    cfg = write(tmp_path, "c.json", {"curve": {"file": "pts.json"}})
    code, out, _ = run(capsys, "phase", "--config", cfg, "--segments", "4000")
    res = json.loads(out)["result"]
    assert code == EXIT_OK
    assert res["exp_match"] < 1e-3


def test_phase_rejects_degenerate_level(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(1.0, hamiltonian="doubled_spin_half"))
    code, _, err = run(capsys, "phase", "--config", cfg)
    assert code == EXIT_CONFIG and "multiplicity" in err


def test_holonomy_doubled(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(math.pi / 3, hamiltonian="doubled_spin_half"))
    code, out, _ = run(capsys, "holonomy", "--config", cfg)
    res = json.loads(out)["result"]
    m = np.array(res["matrix"])
    w = m[..., 0] + 1j * m[..., 1]
    assert code == EXIT_OK and res["rank"] == 2
    assert np.allclose(w, np.exp(1.5j * math.pi) * np.eye(2), atol=1e-6)
    assert res["unitarity_defect"] < 1e-12


def test_holonomy_rank_one_matches_line(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(1.0))
    _, out, _ = run(capsys, "holonomy", "--config", cfg)
    res = json.loads(out)["result"]
    _, out2, _ = run(capsys, "phase", "--config", cfg)
    line = json.loads(out2)["result"]["theta_line"]
    m = res["matrix"][0][0]
    assert complex(*m) == pytest.approx(np.exp(1j * line), abs=1e-12)
    assert res["phase"] == pytest.approx(line, abs=1e-12)


def test_holonomy_constant_family(capsys, tmp_path):
    fam = linear_family([np.diag([0.0, 1.0, 3.0]), np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((3, 3))])
    write(tmp_path, "fam.json", linear_family_to_dict(fam))
    cfg = write(tmp_path, "c.json", {"hamiltonian": {"file": "fam.json"}, "level": 1,
                                     "curve": {"colatitude_circle": {"theta0": 1.0}}})
    code, out, _ = run(capsys, "holonomy", "--config", cfg, "--segments", "64")
    res = json.loads(out)["result"]
    assert code == EXIT_OK
    assert res["matrix"] == [[[1.0, 0.0]]]


def test_sweep_rows_decrease(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(math.pi / 2, sweep=[50, 100, 200]))
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--jobs", "3")
    rows = json.loads(out)["result"]["rows"]
    assert code == EXIT_OK
    assert [r["T"] for r in rows] == [50, 100, 200]
    errs = [r["error_vs_oracle"] for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert all(r["leakage_ok"] for r in rows)


def test_sweep_csv_and_leakage_flag(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(math.pi / 2, sweep=[3, 50]))
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--config", cfg, "--format", "csv", "--output", str(out_path))
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert code == EXIT_OK
    assert [r["leakage_ok"] for r in rows] == ["0", "1"]


def test_sweep_constant_curve(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", {"curve": {"samples": [[0.2, 0.3, 0.4]]}, "sweep": [5, 10]})
    code, out, _ = run(capsys, "sweep", "--config", cfg)
    rows = json.loads(out)["result"]["rows"]
    assert code == EXIT_OK
    assert all(abs(r["phase"]) < 1e-12 for r in rows)


def test_sweep_needs_times(capsys):
    code, _, _ = run(capsys, "sweep")
    assert code == EXIT_CONFIG


def test_curvature_map_shells(capsys, tmp_path):
    for radius, value in ((1.0, 0.5), (2.0, 1 / 32)):
        cfg = write(tmp_path, "c.json", {"grid": {"shell": {"radius": radius, "n_theta": 6, "n_phi": 8}}})
        code, out, _ = run(capsys, "curvature-map", "--config", cfg, "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == EXIT_OK and len(rows) == 48
        assert list(rows[0]) == ["lambda1", "lambda2", "lambda3", "F12", "F13", "F23", "F2"]
        assert max(abs(float(r["F2"]) - value) for r in rows) < 1e-6 * max(1, value)


def test_curvature_map_skips_origin(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", {"grid": {"points": [[1, 0, 0], [0, 0, 0], [0, 1, 0]]}})
    code, out, err = run(capsys, "curvature-map", "--config", cfg)
    res = json.loads(out)["result"]
    assert code == EXIT_OK
    assert res["skipped"] == 1 and res["evaluated"] == 2
    assert "skipped 1" in err


def test_curvature_map_constant_family(capsys, tmp_path):
    fam = linear_family([np.diag([0.0, 1.0]), np.zeros((2, 2)), np.zeros((2, 2))])
    write(tmp_path, "fam.json", linear_family_to_dict(fam))
    cfg = write(tmp_path, "c.json", {"hamiltonian": {"file": "fam.json"}, "level": 0,
                                     "grid": {"box": {"min": [-1, -1], "max": [1, 1], "n": 3}}})
    code, out, _ = run(capsys, "curvature-map", "--config", cfg, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 9
    assert all(float(r["F12"]) == 0 for r in rows)


def test_json_is_deterministic(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(1.0, hamiltonian="doubled_spin_half"))
    outs = []
    for i in range(2):
        path = tmp_path / f"out{i}.json"
        assert main(["holonomy", "--config", cfg, "--output", str(path), "--segments", "256"]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("data,needle", [
    ({"curve": {"colatitude_circle": {"turns": 0}}}, "turns"),
    ({"curve": {"colatitude_circle": {"radius": -1}}}, "radius"),
    ({"curve": {"samples": [[1, 0, 0]], "file": "x"}}, "exactly one"),
    ({"curve": {"file": "missing.json"}}, "does not exist"),
    ({"hamiltonian": "nope"}, "unknown hamiltonian"),
    ({"hamiltonian": {"file": "missing.json"}}, "does not exist"),
    ({"segments": 0}, "segments"),
    ({"bogus": 1}, "unknown config"),
    ({"level": "sideways"}, "level"),
])
def test_config_errors(capsys, tmp_path, data, needle):
    cfg = write(tmp_path, "c.json", data)
    code, _, err = run(capsys, "phase", "--config", cfg)
    assert code == EXIT_CONFIG
    assert needle in err


def test_missing_config_file(capsys, tmp_path):
    code, _, _ = run(capsys, "phase", "--config", str(tmp_path / "none.json"))
    assert code == EXIT_CONFIG


def test_numerical_failure_exit(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", circle(5e-4))
    code, _, err = run(capsys, "phase", "--config", cfg)
    assert code == EXIT_NUMERIC and "GuardBandError" in err


def test_phase_has_no_csv(capsys):
    code, _, _ = run(capsys, "phase", "--format", "csv", "--segments", "64")
    assert code == EXIT_CONFIG


def test_validate_detects_under_resolution(capsys, tmp_path):
    out_path = tmp_path / "v.json"
    code, _, err = run(capsys, "validate", "--segments", "8", "--output", str(out_path))
    checks = {c["key"]: c for c in json.loads(out_path.read_text())["result"]["checks"]}
    assert code == EXIT_NUMERIC
    assert not checks["1"]["passed"] and checks["1"]["measured"]["max_gap"] > 0.1
    assert "[FAIL] 1. SOLID-ANGLE LAW" in err


def test_validate_detects_missing_guard_band(capsys, tmp_path):
    code, _, err = run(capsys, "validate", "--guard-band", "0", "--output", str(tmp_path / "v.json"))
    assert code == EXIT_NUMERIC
    assert "[FAIL] G. SINGULAR-AXIS GUARD" in err


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "geophase", "phase", "--segments", "256"], capture_output=True,
                         text=True)
    assert out.returncode == 0
    assert "theta_line" in out.stdout

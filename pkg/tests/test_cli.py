import csv
import json
import subprocess
import sys

import pytest

from wrestrict.cli import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_json(capsys):
    code, out, _ = run(["norm", "--R", "16", "--beta", "1/8", "--solver", "lanczos"], capsys)
    data = json.loads(out)
    assert code == EXIT_OK and data["method"] == "gram_power" and data["beta"] == "1/8"
    assert data["value"] == pytest.approx(6.0935055844578, rel=1e-7)


def test_norm_csv_and_custom_points(tmp_path, capsys):
    pts = tmp_path / "pts.json"
    pts.write_text("[[0, 0]]")
    out = tmp_path / "n.csv"
    code, _, _ = run(["norm", "--lattice", "custom", "--points", str(pts), "--method", "svd",
                      "--out", str(out)], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert float(rows[0]["norm"]) == pytest.approx(2.5066282746, rel=1e-9)


def test_norm_poisson_needs_lattice(tmp_path, capsys):
    pts = tmp_path / "pts.json"
    pts.write_text("[[0, 0]]")
    code, _, err = run(["norm", "--lattice", "custom", "--points", str(pts), "--method", "poisson"], capsys)
    assert code == EXIT_FATAL and "poisson" in err


def test_count(capsys):
    code, out, _ = run(["count", "--axes", "5,5", "--thickness", "1/100,1/100"], capsys)
    data = json.loads(out)
    assert code == EXIT_OK and data["count"] == 12
    assert {"count", "translation", "witnesses"} <= set(data)


def test_count_maximize(capsys):
    code, out, _ = run(["count", "--lattice", "aniso", "--R", "32", "--beta", "1/28", "--dual",
                        "--axes", "1,1", "--thickness", "1/32,1/32", "--maximize"], capsys)
    assert code == EXIT_OK and json.loads(out)["count"] >= 1


def test_detect(tmp_path, capsys):
    pts = [[5, 0], [-5, 0], [0, 5], [0, -5], [3, 4], [4, 3], [-3, 4]]
    f = tmp_path / "d.json"
    f.write_text(json.dumps({"points": pts, "target": [-25, 0, 0, 1, 1, 0]}))
    code, out, _ = run(["detect", "--points", str(f)], capsys)
    data = json.loads(out)
    assert code == EXIT_OK and data["status"] == "common_quadric"
    assert all(isinstance(c, str) and "/" in c for c in data["quadric"])


def test_detect_needs_target(tmp_path, capsys):
    f = tmp_path / "d.json"
    f.write_text("[[0, 0], [1, 1]]")
    code, _, _ = run(["detect", "--points", str(f)], capsys)
    assert code == EXIT_FATAL


def test_sweep_fit_identity(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    out = tmp_path / "s.csv"
    cfg.write_text(f"[experiment]\nbeta_values = 0, 1/8\nR_values = 8, 16, 32\nsolver = lanczos\n"
                   f"output = {out}\n")
    code, _, _ = run(["sweep", "--config", str(cfg)], capsys)
    assert code == EXIT_OK and out.exists() and (tmp_path / "s.csv.json").exists()
    code, text, _ = run(["fit", "--in", str(out), "--surface", "circle", "--lattice", "aniso"], capsys)
    fits = json.loads(text)["fits"]
    assert code == EXIT_OK and len(fits) == 2 and all("slope" in f for f in fits)
    code, text, _ = run(["identity", "--beta", "0", "--R", "16"], capsys)
    data = json.loads(text)
    assert code == EXIT_OK and data["ratio"] > 0


def test_sweep_partial_failure(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[experiment]\nsurface = parabola\nmethod = poisson\nbeta_values = 0\n"
                   "R_values = 8, 16\n")
    code, out, err = run(["sweep", "--config", str(cfg)], capsys)
    assert code == EXIT_PARTIAL and "failed" in err
    assert all(r["error"] for r in json.loads(out))


def test_sweep_bad_config(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[other]\n")
    assert run(["sweep", "--config", str(cfg)], capsys)[0] == EXIT_FATAL
    assert run(["sweep", "--config", str(tmp_path / "missing.ini")], capsys)[0] == EXIT_FATAL


def test_ffield(capsys):
    code, out, _ = run(["ffield", "--p", "13", "--variety", "circle", "--census-exponent", "1.51"], capsys)
    data = json.loads(out)
    assert code == EXIT_OK and set(data) == {"p", "variety", "checks", "histogram", "census"}
    assert data["checks"]["points"] == 12 and data["census"]["exponent"] == 1.51
    assert run(["ffield", "--p", "15"], capsys)[0] == EXIT_FATAL


def test_incidence(capsys):
    code, out, _ = run(["incidence", "--R", "4", "--grid", "4x16", "--k", "2"], capsys)
    data = json.loads(out)
    assert code == EXIT_OK and {"rich_count", "bound_value", "ratio"} <= set(data)


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "wrestrict.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("norm", "count", "detect", "sweep", "fit", "identity", "ffield", "incidence"):
        assert name in proc.stdout

import csv
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from ginprod import cli, limitlaw


def rows(path):
    with open(path, newline="") as fh:
        r = list(csv.reader(fh))
    return r[0], [[float(v) for v in row] for row in r[1:]]


@pytest.fixture(autouse=True)
def _no_out_dir(monkeypatch):
    monkeypatch.delenv("GINPROD_OUT_DIR", raising=False)


def test_sample(tmp_path, capsys):
    out = tmp_path / "batch.csv"
    assert cli.main(["sample", "--n", "200", "--trials", "100", "--seed", "42", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["ks_mu"] <= 0.05
    man = json.loads((tmp_path / "batch.manifest.json").read_text())
    assert man["master_seed"] == 42 and man["config"]["params"]["n"] == 200
    assert "code_version" in man
    header, data = rows(out)
    assert header == ["trial", "index", "scaled_squared_singular_value"] and len(data) == 20000


def test_sample_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["sample", "--n", "30", "--trials", "5", "--seed", "9", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["sample", "--n", "0"],
    ["sample", "--n", "abc"],
    ["sample", "--n", "3000"],
    ["sample", "--trials", "-2"],
    ["density", "--grid", "1:0:5"],
    ["density", "--grid", "nonsense"],
    ["density", "--xi", "-1"],
    ["zeros", "--kappa", "-3"],
    ["zeros", "--kappa", "x/y"],
    ["kernel", "--grid", "0:6:10"],
    ["verify", "--suite", "nope"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv, tmp_path):
    assert cli.main(argv + (["--out", str(tmp_path / "o.csv")] if argv[:1] in (["sample"], ["density"]) else [])) == 2


def test_unknown_tolerance_and_bad_config(tmp_path):
    assert cli.main(["verify", "--suite", "exact", "--tol", "nonsense=1"]) == 2
    assert cli.main(["verify", "--suite", "exact", "--tol", "mass_abs"]) == 2
    bad = tmp_path / "c.json"
    bad.write_text("{not json")
    assert cli.main(["density", "--config", str(bad)]) == 2
    assert cli.main(["density", "--config", str(tmp_path / "missing.json")]) == 2


def test_io_error_exit_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["density", "--grid", "0:1:3", "--out", str(blocker / "d.csv")]) == 3


def test_density(tmp_path):
    out = tmp_path / "d.csv"
    assert cli.main(["density", "--xi", "1", "--grid", "0:6.75:1000", "--out", str(out)]) == 0
    header, data = rows(out)
    data = np.array(data)
    assert header == ["x", "pdf", "cdf"] and len(data) == 1000
    assert np.all(data[:, 1] >= 0)
    assert abs(data[-1, 2] - 1) <= 1e-6
    assert (tmp_path / "d.manifest.json").exists()


def test_density_svg(tmp_path):
    out, svg = tmp_path / "d.csv", tmp_path / "d.svg"
    assert cli.main(["density", "--grid", "0.01:6.7:50", "--out", str(out), "--svg", str(svg)]) == 0
    text = svg.read_text()
    assert text.startswith("<svg") and "<polyline" in text
    assert str(svg) in json.loads((tmp_path / "d.manifest.json").read_text())["outputs"]


def test_zeros(tmp_path):
    out = tmp_path / "z.csv"
    assert cli.main(["zeros", "--k", "400", "--n", "400", "--out", str(out)]) == 0
    header, data = rows(out)
    z = np.array(data)[:, 1]
    assert header == ["index", "zero", "counting_cdf"]
    assert len(z) == 400 and z.max() <= 7.0 and np.all(np.diff(z) > 0)
    assert data[-1][2] == 1.0


def test_zeros_rational_parameters(tmp_path):
    out = tmp_path / "z.csv"
    assert cli.main(["zeros", "--k", "5", "--n", "1", "--kappa", "1/2", "--gamma", "2", "--out", str(out)]) == 0
    man = json.loads((tmp_path / "z.manifest.json").read_text())
    assert man["config"]["params"]["kappa"] == "1/2"


def test_kernel(tmp_path):
    out = tmp_path / "k.csv"
    assert cli.main(["kernel", "--n-matrix", "40", "--grid", "0.25:6.5:64", "--out", str(out)]) == 0
    header, data = rows(out)
    data = np.array(data)
    assert header == ["x", "scaled_diag", "mu_density"] and len(data) == 64
    # interior: keep a soft-edge layer of relative width 2 N^{-2/3} out
    interior = data[:, 0] <= 27 / 4 * (1 - 2 * 40 ** (-2 / 3))
    rel = np.abs(data[interior, 2] - data[interior, 1]) / data[interior, 1]
    assert interior.sum() >= 50
    assert np.all(rel <= 0.10)


def test_verify_exact(tmp_path, capsys):
    rep = tmp_path / "r.json"
    t0 = time.perf_counter()
    assert cli.main(["verify", "--suite", "exact", "--report", str(rep)]) == 0
    assert time.perf_counter() - t0 < 10
    report = json.loads(rep.read_text())
    assert report["suite"] == "exact" and report["checks"]
    assert all(set(c) == {"name", "pass", "measured", "tolerance"} and c["pass"] for c in report["checks"])
    assert "PASS" in capsys.readouterr().out
    assert (tmp_path / "r.manifest.json").exists()


def test_verify_failure_exit_1(tmp_path):
    rep = tmp_path / "r.json"
    assert cli.main(["verify", "--suite", "specfun", "--tol", "edge_rel=1e-12", "--report", str(rep)]) == 1
    report = json.loads(rep.read_text())
    assert not all(c["pass"] for c in report["checks"])
    assert any(c["tolerance"] == 1e-12 for c in report["checks"])


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"density": {"grid": "0:1:7", "out": str(tmp_path / "f.csv")}}))
    assert cli.main(["density", "--config", str(cfg)]) == 0
    assert len(rows(tmp_path / "f.csv")[1]) == 7
    assert cli.main(["density", "--config", str(cfg), "--grid", "0:1:4"]) == 0
    assert len(rows(tmp_path / "f.csv")[1]) == 4
    man = json.loads((tmp_path / "f.manifest.json").read_text())
    assert man["config"]["config_file"] == str(cfg) and man["config"]["params"]["grid"] == "0:1:4"


def test_out_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("GINPROD_OUT_DIR", str(tmp_path / "outs"))
    assert cli.main(["density", "--grid", "0:1:3", "--out", "d.csv"]) == 0
    assert (tmp_path / "outs" / "d.csv").exists()
    assert (tmp_path / "outs" / "d.manifest.json").exists()


def test_compare(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert cli.main(["compare", "--n", "100", "--trials", "20", "--seed", "1", "--out", str(out)]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["ks_m1_marchenko_pastur"] <= 0.05 and s["ks_m2_mu"] <= 0.05
    assert s["mean_m1"] == pytest.approx(1.0, abs=0.05) and s["mean_m2"] == pytest.approx(1.0, abs=0.05)
    header, data = rows(out)
    assert header[0] == "x" and len(header) == 5


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "ginprod", "density", "--grid", "0:1:3", "--out",
                        str(tmp_path / "d.csv")], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "ginprod", "sample", "--n", "0"], capture_output=True, text=True)
    assert r.returncode == 2 and r.stderr

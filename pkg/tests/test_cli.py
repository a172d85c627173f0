import json
import subprocess
import sys

import numpy as np
import pytest

from biortho.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from biortho.report import HEADER_DELIMITER, parse_text, render, strip_header


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body(text):
    return parse_text(text)[1]


def test_models_listing(capsys):
    code, out, _ = run(capsys, "models")
    b = body(out)
    assert code == EXIT_OK
    assert b["s4(r=1).chi"] == 2 and b["s2xs2(a=1, b=1).chi"] == 4 and b["cp2.chi"] == 3
    assert b["cp2.volume"] == pytest.approx(np.pi**2 / 2)


def test_analyze_examples(capsys):
    code, out, _ = run(capsys, "analyze", "--model", "s2xs2", "--budget", "32", "--points", "3")
    b = body(out)
    assert code == EXIT_OK and b["k1perp_min"] == 0 and b["predicates.einstein"] is True
    code, out, _ = run(capsys, "analyze", "--model", "s4", "--r", "1", "--points", "2", "--budget", "0")
    b = body(out)
    assert b["closed_form.k1perp"] == b["closed_form.k3perp"] == 1 and b["predicates.pinched_quarter_one"]
    code, out, _ = run(capsys, "analyze", "--model", "s2xs2", "--a", "1", "--b", "0.5", "--points", "2", "--budget", "0")
    assert body(out)["predicates.einstein"] is False


def test_check_surfaces_gauss_bonnet(capsys):
    code, out, _ = run(capsys, "check", "--model", "s2xs2", "--b", "2", "--chart-nodes", "0", "--format", "json")
    data = json.loads(out)["body"]
    assert code == EXIT_OK
    key = "s2xs2(a=1, b=2).gauss_bonnet.integrals.gauss_bonnet_closed"
    assert data[key] == pytest.approx(32 * np.pi**2)


def test_yamabe_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "yamabe", "--kind", "y", "--model", "s4", "--u", "const")
    assert code == EXIT_OK and body(out)["value"] == pytest.approx(8 * np.sqrt(6) * np.pi, rel=1e-6)
    code, out, _ = run(capsys, "yamabe", "--kind", "y1perp", "--model", "s2xs2", "--u", "const", "--nlat", "8")
    assert abs(body(out)["value"]) < 1e-12
    code, out, _ = run(
        capsys, "yamabe", "--kind", "y1perp", "--model", "s2xs2", "--start", "random", "--seed", "7",
        "--nlat", "12", "--output-dir", str(tmp_path),
    )
    b = body(out)
    assert code == EXIT_OK and b["minimize.value"] <= 1e-6 and b["minimize.monotone"]
    assert (tmp_path / "yamabe_trace.csv").exists()


def test_props_examples(capsys):
    code, out, _ = run(capsys, "props", "--suite", "trace-sum", "--count", "10000")
    b = body(out)
    assert code == EXIT_OK and b["trace-sum.max_residual"] < 1e-10
    code, out, _ = run(capsys, "props", "--suite", "einstein-iff-Kperp-eq-K", "--count", "200", "--einstein")
    assert code == EXIT_OK and body(out)["einstein-iff-Kperp-eq-K.max_residual"] == 0


def test_usage_errors(capsys):
    assert run(capsys, "analyze", "--model", "rp4")[0] == EXIT_USAGE
    assert run(capsys, "analyze", "--model", "s4", "--L", "2")[0] == EXIT_USAGE
    assert run(capsys, "analyze", "--model", "s4", "--r", "-1")[0] == EXIT_USAGE
    assert run(capsys, "props", "--suite", "nope")[0] == EXIT_USAGE
    assert run(capsys, "yamabe", "--model", "cp2")[0] == EXIT_USAGE
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE


def test_numeric_failure_exit(capsys, monkeypatch):
    import biortho.cli as cli
    from biortho.curvature import NumericFailure

    def boom(*a, **k):
        raise NumericFailure("nan")

    monkeypatch.setattr(cli, "curvature_field", boom)
    assert run(capsys, "analyze", "--model", "s4", "--budget", "0")[0] == EXIT_NUMERIC


def test_violation_exit(capsys, monkeypatch):
    import biortho.proplab as pl

    def failing(arr, seed):
        return pl.SuiteReport("always", len(arr), 1.0, 0.0)

    monkeypatch.setitem(pl.SUITES, "always", failing)
    assert run(capsys, "props", "--suite", "always", "--count", "3")[0] == EXIT_VIOLATION


def test_config_file_under_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nmodel = s2xs2\nb = 2\npoints = 2\nbudget = 0\n")
    code, out, _ = run(capsys, "analyze", "--config", str(cfg))
    header, b = parse_text(out)
    assert code == EXIT_OK and header["config.b"] == 2.0 and b["predicates.einstein"] is False
    code, out, _ = run(capsys, "analyze", "--config", str(cfg), "--b", "1")
    assert body(out)["predicates.einstein"] is True
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(capsys, "analyze", "--config", str(bad))[0] == EXIT_USAGE


def test_output_dir_env_override(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("BIORTHO_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "models", "--output", "models.txt", "--output-dir", "/nonexistent")
    assert code == EXIT_OK and out == ""
    assert (tmp_path / "models.txt").read_text().count(HEADER_DELIMITER) == 1


def test_byte_identical_reruns(capsys):
    argv = ["props", "--suite", "spectral-vs-bruteforce", "--count", "20", "--seed", "5", "--format", "json"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    assert strip_header(first) == strip_header(second)


def test_report_round_trip():
    text = render({"tool": "x"}, {"a": 0.1, "b": {"c": True, "d": [1.5, 2]}, "e": None, "f": 1 / 3})
    header, b = parse_text(text)
    assert header == {"tool": "x"}
    assert b == {"a": 0.1, "b.c": True, "b.d": [1.5, 2], "e": None, "f": 1 / 3}
    assert "f = 0.33333333333333331" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "biortho", "models", "--format", "json"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["header"]["command"] == "models"

import json
import subprocess
import sys

import numpy as np
import pytest

from besovtrace.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(scope="module")
def hp_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "hp.json"
    assert main(["build", "--preset", "halfplane", "--h", "0.125", "--out", str(path),
                 "--report", str(path.with_suffix(".build.json"))]) == EXIT_OK
    return path


def test_build_summary(tmp_path):
    out, rep = tmp_path / "sq.json", tmp_path / "r.json"
    assert main(["build", "--preset", "square", "--h", "0.5", "--out", str(out), "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["n_sites"] == 9
    assert len(json.loads(out.read_text())["weights"]) == 9


def test_build_codim_summary(hp_file):
    summary = json.loads(hp_file.with_suffix(".build.json").read_text())
    assert summary["codimension"]["C"] <= 1.5


@pytest.mark.parametrize("argv", [
    ["build", "--preset", "halfplane", "--h", "0.0625", "--theta", "0"],
    ["build", "--preset", "halfplane", "--h", "0.0625", "--theta", "1", "--alpha", "0.3"],
    ["build", "--preset", "nowhere", "--h", "0.5"],
    ["verify", "/no/such/file.json"],
    ["frobnicate"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_malformed_domain(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", str(bad)]) == EXIT_USAGE


def test_verify_whitney_and_codim(hp_file, tmp_path):
    rep = tmp_path / "v.json"
    assert main(["verify", str(hp_file), "--suite", "whitney", "--report", str(rep)]) == EXIT_OK
    checks = {c["name"]: c for c in json.loads(rep.read_text())["suites"]["whitney"]["checks"]}
    assert checks["lemma_pairs_checked"]["value"] > 0 and checks["lemma_violations"]["value"] == 0
    assert main(["verify", str(hp_file), "--suite", "codim", "--report", str(rep)]) == EXIT_OK


def test_verify_exit_code_on_failure(hp_file, tmp_path, monkeypatch):
    from besovtrace import suites
    monkeypatch.setattr(suites, "CODIM_BOUND", 1.0)
    assert main(["verify", str(hp_file), "--suite", "codim", "--report", str(tmp_path / "v.json")]) == EXIT_FAIL


def test_verify_all_square_and_determinism(tmp_path):
    dom = tmp_path / "sq.json"
    main(["build", "--preset", "square", "--h", "0.125", "--out", str(dom), "--report", str(tmp_path / "b")])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", str(dom), "--report", str(a)]) == EXIT_OK
    assert main(["verify", str(dom), "--report", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_extend_trace_besov_pipeline(hp_file, tmp_path):
    obj = json.loads(hp_file.read_text())
    b = obj["boundary"]
    f = tmp_path / "f.csv"
    f.write_text("site_index,value\n" + "".join(f"{s},1.5\n" for s in b))
    F, T = tmp_path / "F.csv", tmp_path / "T.csv"
    assert main(["extend", str(hp_file), str(f), "--out", str(F)]) == EXIT_OK
    vals = np.loadtxt(F, delimiter=",", skiprows=1)[:, 1]
    assert np.allclose(vals, 1.5, atol=1e-12)
    assert main(["trace", str(hp_file), str(F), "--out", str(T), "--report", str(tmp_path / "t.json")]) == 0
    assert np.allclose(np.loadtxt(T, delimiter=",", skiprows=1)[:, 1], 1.5)
    # besov of a cosine: dyadic and integral within the measured equivalence band
    xs = np.array(obj["points"])[b, 0]
    f.write_text("site_index,value\n" + "".join(f"{s},{float(np.cos(2 * np.pi * x / 8))!r}\n" for s, x in zip(b, xs)))
    vals = {}
    for form in ("dyadic", "integral"):
        rep = tmp_path / f"{form}.json"
        assert main(["besov", str(hp_file), str(f), "--form", form, "--report", str(rep)]) == 0
        vals[form] = json.loads(rep.read_text())["value"]
    assert 0.25 <= vals["dyadic"] / vals["integral"] <= 4
    # field over the wrong support
    assert main(["besov", str(hp_file), str(F)]) == EXIT_USAGE


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "besovtrace.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "verify" in out.stdout

import json
import subprocess
import sys

import pytest

from logsumm import __version__
from logsumm.cli import main


def run(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


def data_lines(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


def test_transform_ell_example(tmp_path):
    code, out = run(["transform", "--seq", "const:1", "--method", "ell", "--n", "10", "--convention", "log_n"], tmp_path)
    assert code == 0
    text = out.read_text().splitlines()
    assert text[0] == f"# logsumm {__version__}"
    cfg = json.loads(text[1][len("# config "):])
    assert cfg["seq"] == "const:1" and "threads" not in cfg and "out" not in cfg
    assert data_lines(out)[1].split(",")[1] == "1.311516066904874"


def test_density_even_example(tmp_path):
    code, out = run(["density", "--set", "even", "--n", "1000"], tmp_path)
    assert code == 0
    import csv
    rows = list(csv.DictReader(data_lines(out)))
    assert rows[0]["n"] == "1000" and rows[0]["arithmetic"] == "0.5"


def test_json_format(tmp_path):
    code, out = run(["lln", "--law", "pm1", "--statement", "vi", "--n", "100,1000", "--replicas", "3",
                     "--format", "json"], tmp_path, "r.json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["version"] == __version__ and doc["config"]["statement"] == "vi"
    assert doc["data"]["statement"] == "vi" and len(doc["data"]["trajectories"]) == 3


def test_sidecar_holds_the_timestamp(tmp_path):
    code, out = run(["pnt", "--limit", "10000"], tmp_path)
    meta = json.loads((tmp_path / "out.csv.meta.json").read_text())
    assert code == 0 and "started" in meta and "started" not in out.read_text()


@pytest.mark.parametrize("args", [
    ["lln", "--law", "zipf_log1:signed", "--statement", "vi", "--n", "1000,5000", "--replicas", "6", "--seed", "7"],
    ["lln", "--statement", "ix", "--n", "100,400", "--replicas", "6", "--format", "json"],
    ["asclt", "--n", "5000", "--replicas", "4", "--seed", "3"],
    ["density", "--set", "pap:1,4", "--n", "10000", "--limit", "100000"],
    ["transform", "--seq", "drift:1,2", "--method", "L", "--x", "0.9,0.99"],
    ["tauber", "--seq", "alt01", "--condition", "moricz"],
])
def test_byte_identical_across_threads(args, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(args + ["--threads", "1", "--out", str(a)]) == 0
    assert main(args + ["--threads", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_env_default_outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("LOGSUMM_OUTDIR", str(tmp_path / "outs"))
    assert main(["transform", "--seq", "alt01", "--method", "cesaro1", "--n", "9"]) == 0
    assert (tmp_path / "outs" / "transform.csv").exists()


@pytest.mark.parametrize("args, code", [
    (["transform", "--seq", "bogus", "--method", "ell", "--n", "10"], 1),
    (["transform", "--seq", "const:1", "--method", "nope", "--n", "10"], 1),
    (["transform", "--seq", "const:1", "--method", "ell"], 1),
    (["density", "--set", "odd", "--n", "100"], 1),
    (["lln", "--law", "cauchy"], 1),
    (["transform", "--seq", "const:1", "--method", "movavg", "--n", "10", "--lambda", "0.5"], 2),
    (["lln", "--law", "pm1", "--statement", "vii", "--beta", "1.0", "--n", "100", "--replicas", "2"], 2),
    (["density", "--set", "even", "--n", "100", "--sigma", "1.0"], 2),
    (["pnt", "--limit", "1000000000"], 3),
    (["transform", "--seq", "const:1", "--method", "pmethod", "--law", "pm1", "--n", "5"], 2),
])
def test_exit_codes(args, code, tmp_path, capsys):
    assert main(args + ["--out", str(tmp_path / "x.csv")]) == code
    err = capsys.readouterr().err
    assert err.strip()
    if code in (2, 3):
        assert err.startswith("logsumm.")


def test_no_command_is_usage_error():
    assert main([]) == 1


def test_selftest_passes(tmp_path):
    code, out = run(["selftest"], tmp_path)
    assert code == 0
    assert all(",PASS," in ln for ln in data_lines(out)[1:])


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "logsumm", "transform", "--seq", "const:2", "--method",
                           "borel", "--x", "10", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and out.exists()
    assert "->" in proc.stdout

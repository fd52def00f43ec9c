import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fnmix.cli import load_function, main
from fnmix.chain import load_chain
from fnmix.discrepancy import discrepancy_curve
from fnmix.errors import InputError
from fnmix import zoo


@pytest.fixture
def ts_files(tmp_path):
    assert main(["zoo", "two-state", "--out-dir", str(tmp_path), "--out", str(tmp_path / "zoo.json")]) == 0
    return tmp_path / "chain.json", tmp_path / "indicator.json"


def run_json(args, tmp_path):
    out = tmp_path / "out.json"
    code = main([*args, "--out", str(out)])
    return code, (json.loads(out.read_text()) if code == 0 else None)


def test_spectrum(ts_files, tmp_path):
    chain, f = ts_files
    code, doc = run_json(["spectrum", "--chain", str(chain), "--function", str(f)], tmp_path)
    assert code == 0
    assert doc["eigenvalues"] == pytest.approx([1.0, 0.4])
    assert doc["gamma_star"] == pytest.approx(0.6)
    assert doc["pi_min"] == pytest.approx(0.5)
    assert doc["J_f"] == [2]
    assert doc["config"]["command"] == "spectrum"


def test_mixing_time(ts_files, tmp_path):
    chain, f = ts_files
    code, doc = run_json(["mixing-time", "--chain", str(chain), "--function", str(f), "--delta", "0.05"], tmp_path)
    assert code == 0 and doc["value"] == 3
    code, doc = run_json(["mixing-time", "--chain", str(chain), "--delta", "0.05", "--bound", "uniform"], tmp_path)
    assert code == 0 and doc["value"] >= 3


def test_mixing_time_env_horizon(ts_files, tmp_path, monkeypatch):
    chain, f = ts_files
    monkeypatch.setenv("FNMIX_NMAX", "2")
    code, doc = run_json(["mixing-time", "--chain", str(chain), "--function", str(f), "--delta", "0.01"], tmp_path)
    assert code == 0 and doc == {**doc, "attained": False, "n_max": 2}


@pytest.mark.parametrize("source", ["exact", "fgap", "oracle"])
def test_hoeffding_master(ts_files, tmp_path, source):
    chain, f = ts_files
    args = ["hoeffding", "--chain", str(chain), "--function", str(f), "--method", "master",
            "--epsilon", "0.1", "--N", "2400", "--tf-source", source, "--J", "2"]
    code, doc = run_json(args, tmp_path)
    assert code == 0
    assert set(doc) >= {"method", "epsilon", "N", "burnin", "bound", "n_eff"}
    if source == "exact":
        assert doc["bound"] == pytest.approx(math.exp(-1))


@pytest.mark.parametrize("method", ["spectral", "jsplit", "uniform", "uniform-burnin"])
def test_hoeffding_methods(ts_files, tmp_path, method):
    chain, f = ts_files
    args = ["hoeffding", "--chain", str(chain), "--function", str(f), "--method", method,
            "--epsilon", "0.2", "--N", "5000", "--T0-max", "100"]
    code, doc = run_json(args, tmp_path)
    assert code == 0
    assert 0.0 <= doc["bound"] <= 1.0


def test_jsplit_infeasible_split_is_input_error(ts_files, tmp_path):
    chain, f = ts_files
    # J = {2} has Delta*_J = 1, more than the whole deviation budget
    args = ["hoeffding", "--chain", str(chain), "--function", str(f), "--method", "jsplit",
            "--epsilon", "0.2", "--N", "5000", "--J", "2", "--out", str(tmp_path / "x.json")]
    assert main(args) == 1


def test_precondition_exit_code(ts_files, tmp_path):
    chain, f = ts_files
    args = ["hoeffding", "--chain", str(chain), "--function", str(f), "--epsilon", "0.1", "--N", "2",
            "--out", str(tmp_path / "x.json")]
    assert main(args) == 2
    args = ["hoeffding", "--chain", str(chain), "--function", str(f), "--epsilon", "0.1", "--N", "100",
            "--start-discrepancy", "0.5", "--out", str(tmp_path / "x.json")]
    assert main(args) == 2


def test_input_error_exit_codes(tmp_path, ts_files):
    chain, _ = ts_files
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"d": 2, "P": [0.5, 0.6, 0.5, 0.5]}))
    assert main(["spectrum", "--chain", str(bad)]) == 1
    assert main(["spectrum", "--chain", str(tmp_path / "missing.json")]) == 1
    assert main(["no-such-command"]) == 1
    assert main(["mixing-time", "--chain", str(chain)]) == 1
    fbad = tmp_path / "f.json"
    fbad.write_text("[0, 2]")
    assert main(["spectrum", "--chain", str(chain), "--function", str(fbad)]) == 1


def test_function_formats(tmp_path, ts_files):
    chain = load_chain(ts_files[0])
    (tmp_path / "a.json").write_text("[0, 1]")
    (tmp_path / "b.json").write_text('{"values": [0, 1]}')
    (tmp_path / "c.csv").write_text("f\n0\n1\n")
    for name in ("a.json", "b.json", "c.csv"):
        np.testing.assert_array_equal(load_function(tmp_path / name, chain).values, [0, 1])
    (tmp_path / "d.csv").write_text("0\nx\n")
    with pytest.raises(InputError):
        load_function(tmp_path / "d.csv", chain)


def test_discrepancy_csv_round_trip(ts_files, tmp_path):
    chain, f = ts_files
    out = tmp_path / "curve.csv"
    assert main(["discrepancy", "--chain", str(chain), "--function", str(f), "--n-max", "30", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    vals = np.array([float(r["value"]) for r in rows])
    # 17 significant digits round-trip every double exactly
    np.testing.assert_array_equal(vals, discrepancy_curve(load_chain(chain), [0.0, 1.0], 30).values)
    np.testing.assert_allclose(vals, 0.5 * 0.4 ** np.arange(1, 31), rtol=1e-12, atol=1e-15)
    cfg = json.loads((tmp_path / "curve.csv.config.json").read_text())
    assert cfg["n_max"] == 30


def test_interval(ts_files, tmp_path):
    chain, f = ts_files
    for method in ("uniform", "adaptive"):
        code, doc = run_json(["interval", "--chain", str(chain), "--function", str(f), "--method", method,
                              "--N", "10000", "--eta", "0.05"], tmp_path)
        assert code == 0 and doc["method"] == method
        assert abs(doc["center"] - 0.5) < doc["half_width"]
    assert main(["interval", "--chain", str(chain), "--function", str(f), "--method", "clt", "--N", "100"]) == 2


def test_seqtest(ts_files, tmp_path):
    chain, f = ts_files
    trace = tmp_path / "trace.csv"
    code, doc = run_json(["seqtest", "--chain", str(chain), "--function", str(f), "--mode", "seq", "--r", "0.3",
                          "--reps", "2", "--trace", str(trace)], tmp_path)
    assert code == 0
    assert doc["M"] == pytest.approx(8 * 3 * math.log(20) / 0.1)
    assert all(r["verdict"] == "H0" for r in doc["runs"])
    assert trace.read_text().startswith("rep,N_k,mean,half_width")


def test_simulate_tail(ts_files, tmp_path):
    chain, f = ts_files
    code, doc = run_json(["simulate", "tail", "--chain", str(chain), "--function", str(f), "--N", "100",
                          "--reps", "500", "--epsilon", "1.1"], tmp_path)
    assert code == 0 and doc["tail"]["estimate"] == 0.0


@pytest.mark.parametrize("kind, d", [("cycle", 32), ("line", 20), ("oring", 289), ("mixture", 1024)])
def test_zoo_writes_chains(tmp_path, kind, d):
    args = ["zoo", kind, "--out-dir", str(tmp_path), "--out", str(tmp_path / "z.json")]
    if kind in ("cycle", "line"):
        args += ["--d", str(d // 2 if kind == "cycle" else 20)]
    assert main(args) == 0
    doc = json.loads((tmp_path / "z.json").read_text())
    chain = load_chain(doc["chain"])
    assert chain.d == (40 if kind == "line" else d)
    for path in doc["functions"].values():
        load_function(path, chain)


def test_reproduce_mixture(tmp_path):
    assert main(["reproduce", "mixture", "--out-dir", str(tmp_path), "--n-max", "50", "--out", str(tmp_path / "s.json")]) == 0
    rows = list(csv.reader((tmp_path / "mixture_table.csv").open()))
    assert rows[0] == ["bound_type", "Tf_0.01", "Tf_1e-6"]
    assert [r[0] for r in rows[1:]] == ["Uniform", "FS", "Oracle", "Actual"]


def test_reproduce_cycle(tmp_path):
    assert main(["reproduce", "cycle", "--d", "8", "--out-dir", str(tmp_path), "--out", str(tmp_path / "s.json")]) == 0
    header = (tmp_path / "cycle_d8.csv").read_text().splitlines()[0].split(",")
    assert header == ["n", "exact_f1", "bound_f1", "exact_f4", "bound_f4", "exact_f8", "bound_f8"]
    doc = json.loads((tmp_path / "s.json").read_text())
    for j, per in doc["mixing_times"].items():
        for delta, v in per.items():
            assert v["exact"]["value"] < v["bound"]


def test_reproduce_lowerbound(tmp_path):
    assert main(["reproduce", "lowerbound", "--reps", "2000", "--out", str(tmp_path / "s.json")]) == 0
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["reference"] == pytest.approx(1 / 3)
    assert doc["frequency"]["estimate"] >= 1 / 3


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "fnmix.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for name in ("spectrum", "discrepancy", "mixing-time", "hoeffding", "interval", "seqtest", "zoo", "simulate", "reproduce"):
        assert name in out.stdout

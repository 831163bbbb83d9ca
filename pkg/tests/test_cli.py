import io
import json
import subprocess
import sys

import numpy as np
import pytest

from loophaf.cli import RunConfig, load_config, main, matrix_document
from loophaf.combinatorial import lhaf_bruteforce


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def files(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for key in ("ORDER", "TOL", "ABS_FLOOR", "ENUM_CAP", "SEED", "THREADS", "OUTPUT"):
        monkeypatch.delenv("LOOPHAF_" + key, raising=False)
    return {
        "pair": write(tmp_path, "pair.json", matrix_document([[2, 3], [3, 5]], [7, 11])),
        "noloops": write(tmp_path, "noloops.json", matrix_document([[2, 3], [3, 5]])),
        "odd": write(tmp_path, "odd.json", matrix_document(np.eye(3) * 0.5, [1, 2, 3])),
        "cov": write(tmp_path, "cov.json", {**matrix_document([[1, 0.3], [0.3, 1]]), "mean": [0.5, -1]}),
        "badcov": write(tmp_path, "badcov.json", matrix_document([[1, 2], [2, 1]])),
        "asym": write(tmp_path, "asym.json", matrix_document([[0, 1], [2, 0]])),
        "garbage": write(tmp_path, "garbage.json", {"dim": 2, "entries": [[1, 2], [3, 4]]}),
        "big": write(tmp_path, "big.json", matrix_document(np.eye(22) * 0.1)),
    }


def test_lhaf_and_haf(files):
    code, out, _ = run(["lhaf", files["pair"]])
    assert code == 0 and json.loads(out) == {"lhaf": [80.0, 0.0]}
    code, out, _ = run(["lhaf", files["noloops"], "--diagonal-loops"])
    assert json.loads(out) == {"lhaf": [13.0, 0.0]}
    code, out, _ = run(["haf", files["pair"]])
    assert json.loads(out) == {"haf": [3.0, 0.0]}


def test_genfun_batch_shape(files):
    code, out, _ = run(["genfun", files["pair"], "--order", "3"])
    doc = json.loads(out)
    assert code == 0 and doc["m"] == 1 and doc["order"] == 3
    assert [r["n"] for r in doc["values"]] == [[0], [1], [2], [3]]
    assert doc["values"][1]["lhaf"] == pytest.approx([80.0, 0.0], abs=1e-12)


def test_embed_round_trip(files, tmp_path):
    out_path = tmp_path / "embedded.json"
    assert run(["embed", files["odd"], "--output", str(out_path)])[0] == 0
    code, out, _ = run(["lhaf", str(out_path)])
    direct = lhaf_bruteforce(np.eye(3) * 0.5, [1, 2, 3])
    assert json.loads(out)["lhaf"] == [direct.real, direct.imag]


def test_verify_random_and_file(files):
    code, out, _ = run(["verify", "--random", "2", "3", "--order", "3"])
    summary = json.loads(out)["summary"]
    assert code == 0 and summary["passed"] and summary["instances"] == 3
    assert run(["verify", files["pair"]])[0] == 0
    code, out, _ = run(["verify", "--random", "1", "2", "--tol", "0", "--abs-floor", "0"])
    assert code == 1 and not json.loads(out)["summary"]["passed"]


def test_verify_output_is_byte_identical(files):
    one = run(["verify", "--random", "2", "4", "--seed", "9"])[1]
    two = run(["verify", "--random", "2", "4", "--seed", "9", "--threads", "2"])[1]
    assert one == two
    assert "timings" in run(["verify", "--random", "1", "1", "--timings"])[1]


def test_moment(files):
    code, out, _ = run(["moment", files["cov"], "--powers", "1", "1"])
    assert code == 0 and json.loads(out)["moment"] == pytest.approx(0.3 + 0.5 * -1, abs=1e-15)
    code, out, _ = run(["moment", files["cov"], "--powers", "2", "0", "--mc", "200000", "--seed", "1"])
    doc = json.loads(out)
    assert abs(doc["mc_estimate"] - doc["moment"]) <= 5 * doc["stderr"]


def test_bench_thread_independent_values(files):
    def values(threads):
        doc = json.loads(run(["bench", "--threads", str(threads)])[1])
        return [(r["route"], r["n"], r["value"]) for r in doc["rows"]]

    one = values(1)
    assert one == values(4)
    by_n = {}
    for route, n, value in one:
        by_n.setdefault(tuple(n), []).append(complex(*value))
    for vals in by_n.values():
        assert max(abs(x - vals[0]) for x in vals) <= 1e-9 * max(1, abs(vals[0]))


@pytest.mark.parametrize("argv, code", [
    (["haf", "{garbage}"], 2),
    (["haf", "{asym}"], 2),
    (["haf", "missing.json"], 2),
    (["frobnicate"], 2),
    (["haf", "{odd}"], 3),
    (["genfun", "{odd}"], 3),
    (["lhaf", "{big}", "--diagonal-loops"], 4),
    (["verify", "{pair}", "--order", "11"], 4),
    (["lhaf", "{noloops}"], 5),
    (["verify"], 5),
    (["moment", "{badcov}", "--powers", "2", "0"], 6),
])
def test_exit_codes(files, argv, code):
    argv = [a.format(**files) for a in argv]
    got, out, err = run(argv)
    assert got == code
    if code != 2 or argv[0] != "frobnicate":
        assert json.loads(err)["exit_code"] == code
        assert out == ""


def test_even_dimension_hint(files):
    _, _, err = run(["haf", files["odd"]])
    assert "embed" in json.loads(err)["hint"]


def test_config_precedence(tmp_path):
    (tmp_path / "loophaf.json").write_text(json.dumps({"order": 2, "tol": 1e-3, "seed": 4}))
    env = {"LOOPHAF_ORDER": "5", "LOOPHAF_THREADS": "3"}
    cfg = load_config({"order": 7, "seed": None}, environ=env, cwd=tmp_path)
    assert cfg == RunConfig(order=7, tol=1e-3, seed=4, threads=3)
    cfg = load_config({}, environ=env, cwd=tmp_path)
    assert cfg.order == 5
    assert load_config({}, environ={}, cwd=tmp_path).order == 2
    assert load_config({}, environ={}, cwd=tmp_path / "nowhere") == RunConfig()


def test_config_in_working_directory_reaches_commands(files, tmp_path):
    (tmp_path / "loophaf.json").write_text(json.dumps({"order": 2}))
    assert json.loads(run(["genfun", files["pair"]])[1])["order"] == 2
    (tmp_path / "loophaf.json").write_text("{not json")
    assert run(["genfun", files["pair"]])[0] == 2


def test_bad_env_value(files, monkeypatch):
    monkeypatch.setenv("LOOPHAF_ORDER", "four")
    assert run(["genfun", files["pair"]])[0] == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "loophaf", "lhaf", files["pair"]],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"lhaf": [80.0, 0.0]}

import json
import subprocess
import sys

import pytest

from hampower.cli import main
from hampower.graph import complete_graph, dumps_edge_list, loads_edge_list, power_cycle

CONFIG = """
[experiment]
trials = 3
master_seed = 5
[params]
k = 1
m = 2
[grid]
n = 12
p = 0, 0.5
[budget]
max_nodes = 100000
"""


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


@pytest.fixture
def k5(tmp_path):
    path = tmp_path / "k5.edges"
    path.write_text(dumps_edge_list(complete_graph(5)))
    return str(path)


def test_decompose_example(capsys):
    code, out, _ = run(capsys, "decompose", "--k", "2", "--l", "3", "--r", "2", "--t", "3")
    res = json.loads(out)
    assert code == 0 and res["edge_disjoint"] and res["covers_m_path"] and res["n"] == 27


def test_decompose_cycle_human(capsys):
    code, out, _ = run(capsys, "decompose", "--k", "1", "--m", "5", "--t", "2", "--cycle", "--output", "human")
    assert code == 0 and "covers_m_path: True" in out


def test_density_example(capsys):
    code, out, _ = run(capsys, "density", "--braid", "3,2,2", "--n", "100", "--p", "0.1", "--tau", "1")
    res = json.loads(out)
    assert code == 0 and res["m"] == "9/5" and res["m_closed_form"] == "9/5"
    assert 0 <= res["janson_bound"] <= 1


def test_search_example(capsys, k5):
    code, out, _ = run(capsys, "search", "--m", "2", "--graph", k5)
    res = json.loads(out)
    assert code == 0 and res["verdict"] == "found" and len(res["witness"]) == 5


def test_search_no_time_is_stable(capsys, tmp_path):
    path = tmp_path / "c.edges"
    path.write_text(dumps_edge_list(power_cycle(20, 2)))
    outs = {run(capsys, "search", "--m", "2", "--graph", str(path), "--no-time")[1] for _ in range(2)}
    assert len(outs) == 1 and "elapsed_ms" not in outs.pop()


def test_gadget_dump(capsys, tmp_path):
    prefix = str(tmp_path / "b")
    code, out, _ = run(capsys, "gadget", "--kind", "braid", "--l", "3", "--r", "2", "--t", "3", "--dump", prefix)
    assert code == 0 and json.loads(out)["e"] == 15
    assert loads_edge_list(open(prefix + ".edges").read()).edge_count == 15
    code, out, _ = run(capsys, "gadget", "--kind", "braid", "--l", "3", "--r", "2", "--t", "3", "--output", "csv")
    assert out.splitlines()[0] == "u,v" and len(out.splitlines()) == 16


def test_gadget_b_minus(capsys):
    code, out, _ = run(capsys, "gadget", "--kind", "b-minus", "--k", "1", "--l", "3", "--r", "2")
    assert code == 0 and json.loads(out)["n"] == 10 and json.loads(out)["e"] == 14


def test_domain_error(capsys):
    code, out, err = run(capsys, "gadget", "--kind", "braid", "--l", "3", "--r", "5", "--t", "2")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "ParameterError"
    code, _, err = run(capsys, "decompose", "--k", "2", "--l", "3", "--r", "2", "--m", "9", "--t", "2")
    assert code == 1 and "inconsistent" in json.loads(err)["message"]


def test_missing_file(capsys):
    code, _, err = run(capsys, "search", "--m", "2", "--graph", "/nonexistent.edges")
    assert code == 1 and json.loads(err)["error"] == "FileNotFoundError"


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["search", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_audit_kinds(capsys):
    code, out, _ = run(capsys, "audit", "--kind", "lower-bound", "--n", "12", "--k", "1", "--m", "3")
    assert code == 0 and json.loads(out)["certifies_absence"]
    code, out, _ = run(capsys, "audit", "--kind", "path-edges", "--m", "3", "--q", "8")
    assert json.loads(out)["discrepancy"]
    code, out, _ = run(capsys, "audit", "--kind", "c-prime", "--eps", "1/60")
    assert json.loads(out)["c_prime"] == "3/34"


def test_experiment_jsonl_stream(capsys, tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(CONFIG)
    code, out, _ = run(capsys, "experiment", "--config", str(cfg))
    lines = out.splitlines()
    assert code == 0 and len(lines) == 6
    assert all("verdict" in json.loads(line) for line in lines)
    code, again, _ = run(capsys, "experiment", "--config", str(cfg), "--seed", "5")
    assert again == out
    csv_path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "experiment", "--config", str(cfg), "--output", "csv", "--csv", str(csv_path))
    assert out == csv_path.read_text()


def test_version_subprocess():
    res = subprocess.run([sys.executable, "-m", "hampower.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("hampower-0.1.0")


def test_fraction_exponent(capsys):
    code, out, _ = run(capsys, "density", "--braid", "2,1,2", "--n", "100", "--C", "1", "--exponent=-1/2")
    assert code == 0 and json.loads(out)["p"] == pytest.approx(0.1)
    with pytest.raises(SystemExit) as exc:
        main(["density", "--braid", "2,1,2", "--n", "100", "--C", "1", "--exponent=abc"])
    assert exc.value.code == 2

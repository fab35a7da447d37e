import csv
import io
import json
import subprocess
import sys

import pytest

from stabmetro.cli import main
from stabmetro.graph import cycle, star


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_graph(tmp_path, g, name="g.json"):
    f = tmp_path / name
    f.write_text(json.dumps(g.to_json()))
    return str(f)


def test_analyze_fig1a(capsys):
    code, out, _ = run(capsys, "analyze", "--preset", "fig1a")
    rep = json.loads(out)
    assert code == 0
    assert ["A", "B", "D"] in rep["twins_classes"] and ["F", "G"] in rep["true_twins_classes"]
    assert rep["bound"] == 26


def test_analyze_cycle(capsys, tmp_path):
    code, out, _ = run(capsys, "analyze", "--input", write_graph(tmp_path, cycle(6)))
    rep = json.loads(out)
    assert code == 0 and rep["bound"] == 6
    assert all(len(c) == 1 for c in rep["twins_classes"] + rep["true_twins_classes"])


def test_analyze_malformed(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"n": 3,\n "edges": [[0, 1],]\n}')
    code, _, err = run(capsys, "analyze", "--input", str(f))
    assert code == 1 and "line 2" in err


def test_search_star(capsys, tmp_path):
    code, out, _ = run(capsys, "search", "--input", write_graph(tmp_path, star(8)))
    rep = json.loads(out)
    assert code == 0 and rep["qfi"] == 64 and rep["attainable"]
    assert len(rep["hamiltonian"]) == 8 and len(rep["measurement"]) == 8


def test_search_forced_alpha(capsys):
    code, out, _ = run(capsys, "search", "--preset", "fig1a", "--alpha", "C,F,I,J")
    rep = json.loads(out)
    assert code == 0 and rep["qfi"] == 24
    assert sorted(map(tuple, rep["hamiltonian_labels"])) == sorted(
        [("X", "A"), ("X", "B"), ("X", "D"), ("X", "J"), ("Y", "F"), ("Y", "G"), ("Z", "C"), ("Z", "I")]
    )


def test_search_size_limit(capsys, tmp_path):
    code, _, err = run(capsys, "search", "--input", write_graph(tmp_path, star(25)), "--mode", "exhaustive")
    assert code == 2 and "limited" in err
    code, out, _ = run(capsys, "search", "--input", write_graph(tmp_path, star(25)), "--mode", "greedy")
    assert code == 0 and json.loads(out)["qfi"] == 625


def test_verify_fig1a(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "fig1a", "--alpha", "C,F,I,J", "--theta", "0,0.3,1.0")
    rep = json.loads(out)
    assert code == 0 and all(rep["conditions"].values())
    assert all(abs(r["gap"]) < 1e-7 for r in rep["rows"])


def test_verify_ghz6_model(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "ghz6_model")
    rep = json.loads(out)
    assert code == 0
    for r in rep["rows"]:
        assert r["qfi"] == pytest.approx(36) and r["cfi"] == pytest.approx(36)


def test_verify_corrupted_measurement(capsys, tmp_path):
    model = {"probe": {"kind": "ghz", "n": 6}, "hamiltonian": [["X", q] for q in range(6)], "measurement": ["X"] + ["Z"] * 5, "stabilizer": "ZZZZZZ"}
    f = tmp_path / "m.json"
    f.write_text(json.dumps(model))
    code, out, _ = run(capsys, "verify", "--input", str(f))
    rep = json.loads(out)
    assert code == 3 and not rep["conditions"]["ii_measurement_anticommutes_h"]


def test_verify_oracle_limit(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "--input", write_graph(tmp_path, star(12)), "--oracle-limit", "10")
    assert code == 2


def test_protocol2(capsys):
    code, out, _ = run(capsys, "protocol2", "--blocks", "3,3,3", "--state-preset", "ghz", "--oracle")
    rep = json.loads(out)
    assert code == 0 and rep["qfi"] == 81 and rep["oracle_qfi"] == pytest.approx(81) and rep["oracle_member"]
    assert rep["tolerance"] == pytest.approx(1.0)
    code, out, _ = run(capsys, "protocol2", "--blocks", "4,5", "--state-preset", "uniform")
    assert json.loads(out)["qfi"] == pytest.approx((81 + 1) / 2)
    code, _, _ = run(capsys, "protocol2", "--blocks", "1,3")
    assert code == 1


def test_protocol2_state_file(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"real": [1, 1]}))
    code, out, _ = run(capsys, "protocol2", "--blocks", "2,2", "--state", str(f))
    assert code == 0 and json.loads(out)["qfi"] == pytest.approx(8)


def test_noise_fig3a(capsys):
    code, out, _ = run(capsys, "noise", "--preset", "fig3a", "--format", "csv", "--budget", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    ghz = [r for r in rows if r["probe_id"] == "ghz"]
    assert len(ghz) == 15
    for r in ghz:
        assert float(r["f_dap"]) == pytest.approx(81 * (1 - 2 * float(r["p"])) ** 18, rel=1e-9, abs=1e-15)


def test_noise_fig3b_has_sql_baseline(capsys):
    code, out, _ = run(capsys, "noise", "--preset", "fig3b", "--n", "4,9,14", "--budget", "1")
    rows = json.loads(out)["rows"]
    assert code == 0
    assert {r["n"]: r["f_dap"] for r in rows if r["probe_id"] == "sql"} == {4: 4.0, 9: 9.0, 14: 14.0}


def test_noise_rejects_bad_p(capsys):
    code, _, err = run(capsys, "noise", "--preset", "fig3a", "--p", "1.5")
    assert code == 1 and "outside" in err


def test_construct_atype53(capsys):
    code, out, _ = run(capsys, "construct", "--preset", "atype53")
    rep = json.loads(out)
    assert code == 0 and rep["graph"]["n"] == 27
    assert rep["scaling"]["exponent"] == pytest.approx(5 / 3, abs=0.15)


def test_construct_rule_error(capsys, tmp_path):
    data = {"type": "B", "meta_edges": [[0, 1], [1, 2], [2, 3], [3, 0]], "meta_stabilizer": "YZZY",
            "assignment": [{"kind": "s1", "size": 4}, {"kind": "s3", "size": 5}, {"kind": "s3", "size": 5}, {"kind": "s2", "size": 4}]}
    f = tmp_path / "b.json"
    f.write_text(json.dumps(data))
    code, _, err = run(capsys, "construct", "--input", str(f))
    assert code == 1 and "Y position" in err


def test_construct_two_points(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"scaling": {"family": "star", "n_values": [8, 16]}}))
    code, _, err = run(capsys, "construct", "--input", str(f))
    assert code == 1 and ">= 3" in err


def test_unknown_preset(capsys):
    code, _, err = run(capsys, "analyze", "--preset", "nope")
    assert code == 1 and "unknown preset" in err


def test_deterministic_output(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        assert main(["noise", "--preset", "fig3a", "--p", "0.1,0.2", "--seed", "3", "--budget", "1", "--output", str(f)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "stabmetro", "analyze", "--preset", "fig1a"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["bound"] == 26

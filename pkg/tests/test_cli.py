import csv
import json
import subprocess
import sys

import pytest

from photonqfa.cli import main, parse_word


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_parse_word():
    assert parse_word("a^5", ("a",)) == 5
    assert parse_word("aaa", ("a",)) == 3
    assert parse_word("eps", ("a",)) == 0
    assert parse_word("b^2a", ("a", "b")) == ["b", "b", "a"]
    assert parse_word("", ("a", "b")) == []
    with pytest.raises(Exception):
        parse_word("a^x", ("a",))


def test_build_reports(capsys):
    code, rep = run_json(capsys, "build", "lm-qfa", "5", "-o", "qfa_a5.json")
    assert code == 0
    assert rep["lambda"] == pytest.approx(0.827254, abs=1e-6)
    assert rep["rho"] == pytest.approx(0.172746, abs=1e-6)

    code, rep = run_json(capsys, "build", "lm-dfa", "5")
    assert code == 0 and rep["states"] == 5 and rep["file"] == "lm-dfa-5.json"

    code, rep = run_json(capsys, "build", "lmn-pfa", "2", "3")
    assert rep["states"] == 6
    assert sorted(rep["accepting"]) == ["p0", "q0", "s"]


@pytest.mark.parametrize("argv", [("build", "lm-dfa", "0"), ("build", "lm-dfa", "x"),
                                  ("build", "lmn-pfa", "2"), ("build", "nope", "3")])
def test_build_invalid_params(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_accept_examples(capsys):
    run(capsys, "build", "lm-qfa", "5", "-o", "qfa_a5.json")
    run(capsys, "build", "lm-dfa", "5", "-o", "dfa_l5.json")
    run(capsys, "build", "lmn-pfa", "2", "3", "-o", "pfa_l6.json")

    code, out = run_json(capsys, "accept", "qfa_a5.json", "a^5")
    assert code == 0 and out == {"p": 1.0}

    code, out = run_json(capsys, "accept", "dfa_l5.json", "a^3")
    assert code == 1 and out == {"accept": False}

    code, out = run_json(capsys, "accept", "pfa_l6.json", "a^6", "--cut-point", "0.75")
    assert code == 0 and out == {"p": 1.0, "accept": True}

    code, out = run_json(capsys, "accept", "qfa_a5.json", "a^1")
    assert code == 1 and out["p"] == pytest.approx(0.654508497)

    code, out = run_json(capsys, "accept", "qfa_a5.json", "a^1000000000000")
    assert code == 0 and 1 - 1e-6 < out["p"] <= 1.0


def test_accept_errors(capsys):
    run(capsys, "build", "lm-dfa", "5", "-o", "d.json")
    assert run(capsys, "accept", "d.json", "a^?")[0] == 2
    assert run(capsys, "accept", "missing.json", "a")[0] == 2
    assert run(capsys, "accept", "d.json", "b")[0] == 2


def test_ek_nfa(capsys):
    run(capsys, "build", "ek-nfa", "2", "-o", "e2.json")
    assert run_json(capsys, "accept", "e2.json", "aaba")[0] == 0
    assert run_json(capsys, "accept", "e2.json", "ab")[0] == 1


def test_grammar_build(capsys, in_tmp):
    (in_tmp / "e2.txt").write_text("B0 -> a B0 | b B0 | b B1\nB1 -> a B2 | b B2\nB2 -> eps\n")
    code, rep = run_json(capsys, "build", "grammar", "e2.txt")
    assert code == 0 and rep["kind"] == "nfa"
    assert run_json(capsys, "accept", "e2.json", "abb")[0] == 0


def test_amplify(capsys):
    run(capsys, "build", "lm-qfa", "5", "-o", "q.json")
    code, out = run_json(capsys, "amplify", "q.json", "a^5", "--reps", "11", "--seed", "1")
    assert code == 0 and out["accept_votes"] == 11
    again = run_json(capsys, "amplify", "q.json", "a^1", "--reps", "101", "--seed", "9")
    assert again == run_json(capsys, "amplify", "q.json", "a^1", "--reps", "101", "--seed", "9")
    assert run(capsys, "amplify", "q.json", "a", "--reps", "4")[0] == 2
    code, out = run_json(capsys, "amplify", "q.json", "a", "--reps", "3")
    assert isinstance(out["seed"], int)


def test_scan(capsys):
    run(capsys, "build", "lm-qfa", "7", "-o", "q.json")
    code, out = run_json(capsys, "scan", "q.json", "--horizon", "70")
    assert code == 0
    assert out["isolation"] == pytest.approx((1 - 0.9009688679 ** 2) / 2, abs=1e-8)


def test_simulate_outputs(capsys, in_tmp):
    code, out = run_json(capsys, "simulate", "-m", "5", "--mean", "36", "--k", "1,5", "--reps", "50",
                         "--seed", "3", "--out", "sim")
    assert code == 0 and out["records"] == 100
    rows = list(csv.DictReader((in_tmp / "sim" / "experiment.csv").open()))
    assert len(rows) == 100
    assert {r["k"] for r in rows} == {"1", "5"}
    summary = json.loads((in_tmp / "sim" / "summary.json").read_text())
    assert set(summary) >= {"m", "mean_counts", "n_th", "p_err_analytic", "p_err_empirical", "convention"}
    manifest = json.loads((in_tmp / "sim" / "experiment.manifest.json").read_text())
    assert manifest["rng_seed"] == 3 and manifest["subcommand"] == "simulate"


def test_simulate_m2_rejects_everything(capsys, in_tmp):
    code, _ = run_json(capsys, "simulate", "-m", "2", "--mean", "100", "--k", "1", "--seed", "0")
    assert code == 0
    rows = list(csv.DictReader((in_tmp / "simulation" / "experiment.csv").open()))
    assert all(r["count"] == "0" and r["verdict"] == "0" for r in rows)


def test_simulate_random_k(capsys, in_tmp):
    code, out = run_json(capsys, "simulate", "-m", "23", "--mean", "18439", "--k-random", "10", "1", "500",
                         "--seed", "7", "--out", "r")
    assert code == 0 and out["records"] == 10
    assert out["n_th"] == pytest.approx(18267.5, abs=0.5)
    assert out["p_err"] == pytest.approx(0.103, abs=0.002)


def test_simulate_auto_seed_is_recorded(capsys, in_tmp):
    code, out = run_json(capsys, "simulate", "-m", "5", "--mean", "108", "--k", "1", "--out", "s")
    manifest = json.loads((in_tmp / "s" / "experiment.manifest.json").read_text())
    assert manifest["argv"][-2:] == ["--seed", str(out["seed"])]


def test_simulate_bad_config(capsys):
    assert run(capsys, "simulate", "-m", "0", "--mean", "10", "--k", "1")[0] == 2
    assert run(capsys, "simulate", "-m", "5", "--mean", "-1", "--k", "1")[0] == 2


def test_error_curve(capsys, in_tmp):
    code, text, _ = run(capsys, "error-curve", "-m", "1,23", "--mean", "18439,56477")
    assert code == 0
    rows = list(csv.DictReader(text.splitlines()))
    assert len(rows) == 4
    assert rows[0]["error"] and not rows[0]["p_err"]
    assert float(rows[2]["p_err"]) == pytest.approx(0.102977, abs=1e-6)
    assert float(rows[3]["p_err"]) == pytest.approx(0.013432, abs=1e-6)
    code, _, _ = run(capsys, "error-curve", "-m", "5", "--mean-log", "10", "1e5", "9", "--out", "c.csv")
    assert code == 0 and (in_tmp / "c.csv.manifest.json").exists()


def test_rerun_reproduces_bytes(capsys, in_tmp):
    run(capsys, "simulate", "-m", "5", "--mean", "479", "--k", "0,1,2,5", "--reps", "20", "--out", "x")
    first = (in_tmp / "x" / "experiment.csv").read_bytes(), (in_tmp / "x" / "summary.json").read_bytes()
    (in_tmp / "x" / "experiment.csv").unlink()
    assert run(capsys, "rerun", "x/experiment.manifest.json")[0] == 0
    second = (in_tmp / "x" / "experiment.csv").read_bytes(), (in_tmp / "x" / "summary.json").read_bytes()
    assert first == second


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "photonqfa", "build", "lm-dfa", "3"], cwd=tmp_path,
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["states"] == 3

import json

import pytest

from app.cli import EXIT_BUDGET, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main


def records(output: str):
    return [json.loads(line) for line in output.splitlines() if line.strip()]


def test_cost_human(capsys):
    assert main(["cost"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "210,000" in out
    assert "100,000,000" in out
    assert "125.00" in out
    assert "lambda_s defaulted" in out


def test_cost_json_lines(capsys):
    assert main(["cost", "--lambda-s", "0.2", "--format", "json-lines"]) == EXIT_OK
    quotes = records(capsys.readouterr().out)
    assert [q["type"] for q in quotes] == ["cost_quote"] * 5
    assert quotes[2]["bound_kind"] == "BF_Simplified"
    assert quotes[2]["value_sat"] == 210_000


def test_cost_with_absolute_f1(capsys):
    assert main(["cost", "--f1", "15020000", "--lambda-s", "0.2", "--format", "json-lines"]) == EXIT_OK
    assert records(capsys.readouterr().out)[2]["value_sat"] == 310_000


@pytest.mark.parametrize("argv", [
    ["cost", "--f-bar", "-5"],
    ["cost", "--lambda-s", "0.04", "--T", "2"],
    ["simulate", "--params", "missing.params"],
    ["simulate", "--params", "three_miners_2022.params", "--trials", "0"],
    ["simulate", "--params", "three_miners_2022.params", "--strategies", "greedy,greedy,selfish-miner"],
    ["txgraph", "simulate", "--scenario", "Tx9@1"],
    ["bogus"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_simulate_json_lines(capsys):
    argv = ["simulate", "--params", "three_miners_2022.params", "--trials", "50", "--seed", "3"]
    argv += ["--format", "json-lines"]
    assert main(argv) == EXIT_OK
    (estimate,) = records(capsys.readouterr().out)
    assert estimate["type"] == "utility_estimate"
    assert estimate["trials"] == 50
    assert len(estimate["mean"]) == 3


def test_simulate_writes_trace(capsys, tmp_path):
    trace = tmp_path / "trace.jsonl"
    argv = ["simulate", "--params", "three_miners_2022.params", "--trials", "5", "--trace", str(trace)]
    assert main(argv) == EXIT_OK
    lines = records(trace.read_text(encoding="utf-8"))
    assert lines[-1]["type"] == "settlement"
    assert "Utility estimate over 5 trials" in capsys.readouterr().out


def test_oracle_json_lines(capsys):
    assert main(["oracle", "--params", "three_miners_2022.params", "--format", "json-lines"]) == EXIT_OK
    output = records(capsys.readouterr().out)
    assert output[0]["type"] == "conditions"
    assert output[0]["equilibrium_conditions_hold"] is True
    responses = [r for r in output if r["type"] == "best_response"]
    assert len(responses) == 3
    assert all(r["is_best_response"] for r in responses)


def test_oracle_node_limit(capsys):
    assert main(["oracle", "--params", "three_miners_2022.params", "--node-limit", "10"]) == EXIT_BUDGET


def test_empirics_json_lines(capsys):
    assert main(["empirics", "--format", "json-lines"]) == EXIT_OK
    (report,) = records(capsys.readouterr().out)
    assert report["type"] == "empirics"
    assert report["strongest_pool"] == "Foundry USA"
    assert report["weeks"] == 52


def test_txgraph_build_and_validate(capsys, tmp_path):
    path = tmp_path / "graph.json"
    assert main(["txgraph", "build", "--out", str(path)]) == EXIT_OK
    assert main(["txgraph", "validate", "--graph", str(path)]) == EXIT_OK
    assert "Graph is valid" in capsys.readouterr().out

    document = json.loads(path.read_text(encoding="utf-8"))
    for template in document["templates"]:
        if template["id"] == "TxP2":
            template["inputs"] = template["inputs"][:1]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(document), encoding="utf-8")
    assert main(["txgraph", "validate", "--graph", str(broken), "--format", "json-lines"]) == EXIT_RUNTIME
    (report,) = records(capsys.readouterr().out)
    assert "deposit reclaimable without bribe confirmation" in report["violations"]


def test_txgraph_simulate(capsys):
    argv = ["txgraph", "simulate", "--scenario", "CommitmentOld@1,Tx1@2", "--format", "json-lines"]
    assert main(argv) == EXIT_OK
    (result,) = records(capsys.readouterr().out)
    assert result["type"] == "confirmation"
    assert result["dead"] == ["Tx2", "TxB", "TxP2"]


def test_txgraph_conflict_is_a_runtime_error():
    argv = ["txgraph", "simulate", "--scenario", "CommitmentOld@1,Tx1@2,Tx2@111"]
    assert main(argv) == EXIT_RUNTIME

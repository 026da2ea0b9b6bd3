import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from factories import coin_pomdp, permutation_pomdp, random_goal_pomdp
from qomdp import io
from qomdp.classical import GoalPomdp
from qomdp.cli import main
from qomdp.errors import ParseError, ValidationError
from qomdp.reductions import QmopInstance

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


# model files


def test_round_trip_every_kind(tmp_path):
    rng = np.random.default_rng(0)
    from factories import random_mdp, random_pomdp, random_qomdp
    from qomdp.classical import GoalMdp
    from qomdp.reductions import qmop_to_goal_qomdp, random_qmop_instance

    s = random_qmop_instance(2, 2, rng)
    models = [
        random_mdp(rng, 3, 2),
        GoalMdp(np.array([[[0.5, 0.5]], [[0.0, 1.0]]]), 1),
        random_pomdp(rng, 3, 2, 2),
        random_goal_pomdp(rng, 3, 2, 2),
        random_qomdp(rng, 2, 2, 2),
        qmop_to_goal_qomdp(s),
        s,
    ]
    for m in models:
        path = tmp_path / "m.json"
        io.save_model(m, path)
        kind, back = io.load_model(path)
        assert io.model_document(back) == io.model_document(m), kind


def test_goal_is_moved_last_on_load(tmp_path):
    p = coin_pomdp()
    flipped = GoalPomdp(p.transition[::-1, :, ::-1], p.observation[::-1], [0, 1], 0)
    io.save_model(flipped, tmp_path / "f.json")
    _, back = io.load_model(tmp_path / "f.json")
    assert back.goal == 1
    np.testing.assert_array_equal(back.transition, p.transition)


def test_row_sum_error(tmp_path):
    doc = io.model_document(coin_pomdp())
    doc["body"]["transition"][0][0] = [0.5, 0.4]
    with pytest.raises(ValidationError) as err:
        io.parse_model(doc)
    (v,) = err.value.violations
    assert v.invariant == "transition rows sum to 1"
    assert v.deviation == pytest.approx(0.1)


def test_qmop_completeness_error():
    doc = io.model_document(QmopInstance([np.diag([1.0, 0.0])]))
    with pytest.raises(ValidationError) as err:
        io.parse_model(doc)
    assert err.value.violations[0].invariant == "Kraus completeness"
    assert err.value.violations[0].deviation == pytest.approx(1.0)


def test_unknown_fields_rejected():
    doc = io.model_document(coin_pomdp())
    doc["body"]["gamma"] = 0.9
    with pytest.raises(ValidationError) as err:
        io.parse_model(doc)
    assert "gamma" in err.value.violations[0].invariant
    doc = io.model_document(coin_pomdp())
    doc["comment"] = "x"
    with pytest.raises(ValidationError):
        io.parse_model(doc)


def test_version_and_kind_checked():
    doc = io.model_document(coin_pomdp())
    with pytest.raises(ValidationError):
        io.parse_model({**doc, "version": "dproc-2"})
    with pytest.raises(ValidationError):
        io.parse_model({**doc, "kind": "pomdp"})


def test_declared_counts_must_match():
    doc = io.model_document(coin_pomdp())
    doc["body"]["num_obs"] = 3
    with pytest.raises(ValidationError) as err:
        io.parse_model(doc)
    assert err.value.violations[0].invariant == "declared num_obs matches data"


def test_ragged_arrays_are_validation_errors():
    doc = io.model_document(coin_pomdp())
    doc["body"]["transition"][0] = [[0.5, 0.5, 0.0]]
    with pytest.raises(ValidationError):
        io.parse_model(doc)


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        io.load_model(bad)
    with pytest.raises(ParseError):
        io.load_model(tmp_path / "missing.json")


def test_report_encoding():
    text = io.dumps_report({"b": 0.1, "a": [1, True, None], "c": float("nan")})
    assert text == '{"b": 0.10000000000000001, "a": [1, true, null], "c": null}'
    assert json.loads(text)["b"] == 0.1


# commands


def test_validate(capsys, tmp_path):
    r = report(capsys, "validate", DATA / "coin.json")
    assert r["valid"] is True and r["kind"] == "goal_pomdp"
    assert list(r)[:6] == ["command", "decided", "value", "witness", "nodes_expanded", "bound_used"]
    doc = io.model_document(coin_pomdp())
    doc["body"]["transition"][0][0] = [0.5, 0.4]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "validate", path)
    assert code == 2
    assert json.loads(out)["violations"][0]["invariant"] == "transition rows sum to 1"
    assert "rows sum to 1" in err


def test_reduce_then_decide(capsys, tmp_path):
    out = tmp_path / "q.json"
    r = report(capsys, "reduce-qmop", DATA / "projectors.json", "--out", out)
    assert (r["dim"], r["num_actions"], r["num_obs"]) == (3, 2, 4)
    assert report(capsys, "validate", out)["kind"] == "goal_qomdp"
    r = report(capsys, "decide-reach", out, "--depth", 2)
    assert r["decided"] == "yes" and r["witness"] == [1, 2] and r["bound_used"] == 2
    r = report(capsys, "decide-reach", out, "--depth", 1)
    assert r["decided"] == "unknown" and r["witness"] is None


def test_decide_reach_pomdp(capsys):
    assert report(capsys, "decide-reach", DATA / "coin.json")["decided"] == "no"
    r = report(capsys, "decide-reach", DATA / "deterministic.json")
    assert r["decided"] == "yes"
    assert r["witness"] == [{"support": [1, 0], "action": 1}]


def test_solve(capsys):
    r = report(capsys, "solve", DATA / "tiny.json", "--horizon", 1)
    _, model = io.load_model(DATA / "tiny.json")
    assert r["value"] == max(model.b0 @ model.reward[:, a] for a in range(model.num_actions))
    r = report(capsys, "solve", DATA / "tiny.json", "--horizon", 2, "--threshold", 1.0)
    assert r["decided"] == "yes"
    r = report(capsys, "solve", DATA / "tiny.json", "--horizon", 2, "--threshold", 100)
    assert r["decided"] == "no"


def test_simulate(capsys, tmp_path):
    r = report(capsys, "simulate", DATA / "coin.json", "--policy", "1,1,1", "--steps", 3, "--trials", 2000)
    assert abs(r["value"] - 0.875) < 4 * r["stderr"]
    assert r["seed"] == 0
    r = report(capsys, "simulate", DATA / "deterministic.json", "--policy", "decider", "--steps", 1, "--trials", 50)
    assert r["value"] == 1
    code, _, err = run(capsys, "simulate", DATA / "coin.json", "--policy", "2", "--steps", 1, "--trials", 5)
    assert code == 2 and "outside" in err


def test_qmop_search(capsys):
    r = report(capsys, "qmop-search", DATA / "projectors.json", "--max-len", 2)
    assert r["decided"] == "yes" and r["witness"] == [1, 2] and r["value"] == 0
    r = report(capsys, "qmop-search", DATA / "unitary_x.json", "--max-len", 4)
    assert r["decided"] == "unknown" and r["bound_used"] == 4


def test_embed(capsys, tmp_path):
    out = tmp_path / "e.json"
    report(capsys, "embed", DATA / "tiny.json", "--out", out)
    kind, q = io.load_model(out)
    assert kind == "qomdp" and q.violations() == []
    a = report(capsys, "solve", DATA / "tiny.json", "--horizon", 3)
    b = report(capsys, "solve", out, "--horizon", 3)
    assert abs(a["value"] - b["value"]) < 1e-10

    t = np.array([[[1.0, 0.0]], [[1.0, 0.0]]])
    from qomdp.classical import Pomdp

    io.save_model(Pomdp(t, np.ones((2, 1, 1)), np.zeros((2, 1)), [0.5, 0.5], 0.5), tmp_path / "m.json")
    code, out_text, err = run(capsys, "embed", tmp_path / "m.json", "--out", tmp_path / "x.json")
    assert code == 2 and json.loads(out_text)["embeddable"] is False
    assert not (tmp_path / "x.json").exists()


def test_wrong_kind_and_flags(capsys):
    code, _, err = run(capsys, "solve", DATA / "coin.json", "--horizon", 2)
    assert code == 2 and "expects" in err
    code, _, err = run(capsys, "solve", DATA / "tiny.json")
    assert code == 2 and "usage" in err
    code, _, err = run(capsys, "nonsense")
    assert code == 2 and "usage" in err
    code, _, _ = run(capsys, "solve", DATA / "tiny.json", "--horizon", 0)
    assert code == 2


def test_internal_error_exit_code(capsys):
    # horizon beyond the node budget is a runtime failure, not bad input
    code, out, err = run(capsys, "solve", DATA / "tiny.json", "--horizon", 30)
    assert code == 1 and out == "" and "BudgetExceeded" in err


def test_reports_are_byte_identical(tmp_path):
    cmds = [
        ["simulate", DATA / "coin.json", "--policy", "1,1", "--steps", 2, "--trials", 500, "--seed", 7],
        ["decide-reach", DATA / "coin.json"],
        ["solve", DATA / "tiny.json", "--horizon", 3],
        ["qmop-search", DATA / "projectors.json", "--max-len", 3],
    ]
    for cmd in cmds:
        outs = [
            subprocess.run([sys.executable, "-m", "qomdp", *map(str, cmd)], capture_output=True, check=True).stdout
            for _ in range(2)
        ]
        assert outs[0] == outs[1]


def test_random_goal_pomdp_files_round_trip_through_cli(capsys, tmp_path):
    rng = np.random.default_rng(3)
    for k in range(5):
        path = tmp_path / f"g{k}.json"
        io.save_model(random_goal_pomdp(rng, 3, 2, 1), path)
        assert report(capsys, "decide-reach", path)["decided"] in ("yes", "no")
    p = permutation_pomdp(rng, 3, 2, 2)
    io.save_model(p, tmp_path / "perm.json")
    report(capsys, "embed", tmp_path / "perm.json", "--out", tmp_path / "perm_q.json")
    assert report(capsys, "validate", tmp_path / "perm_q.json")["valid"]

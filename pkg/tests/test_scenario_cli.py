import json
import os
from pathlib import Path

import numpy as np
import pytest

from fjdyn import cli, suites
from fjdyn import scenario as sio
from fjdyn.errors import ParseError, ValidationError
from fjdyn.single import simulate_single_issue

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
MINIMAL = {"W": [[0, 1], [1, 0]], "xi": [0.5, 0.5], "x0": [0, 1]}


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


# --- loading -----------------------------------------------------------------


def test_minimal_file_gets_defaults(tmp_path):
    sc = sio.load_scenario(write(tmp_path, MINIMAL))
    assert sc.mode == "single" and sc.confidence is None and sc.seed is None
    assert sc.budgets == sio.Budgets(100_000, 10_000)
    assert sc.tolerances == sio.Tolerances(1e-10, 1e-6, 1e-6)
    np.testing.assert_array_equal(sc.x0, [0.0, 1.0])


def test_bad_row_sum_names_the_row(tmp_path):
    doc = dict(MINIMAL, W=[[0, 1], [0.5, 0.55]])
    with pytest.raises(ValidationError) as info:
        sio.load_scenario(write(tmp_path, doc))
    assert info.value.field == "W[1]"


def test_bounded_mode_needs_confidence(tmp_path):
    with pytest.raises(ValidationError) as info:
        sio.load_scenario(write(tmp_path, dict(MINIMAL, mode="bounded")))
    assert info.value.field == "confidence"


def test_syntax_error_reports_line_and_column(tmp_path):
    with pytest.raises(ParseError) as info:
        sio.load_scenario(write(tmp_path, '{\n  "W": [[0, 1],\n  oops\n}'))
    assert info.value.field.startswith("line 3 column")


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        sio.load_scenario(tmp_path / "absent.json")


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"xi": [0.5]}, "xi"),
        ({"x0": [0, "a"]}, "x0[1]"),
        ({"xi": [0.5, 1.5]}, "xi[1]"),
        ({"mode": "loop"}, "mode"),
        ({"tolerances": {"step_tol": 0}}, "tolerances.step_tol"),
        ({"tolerances": {"speed": 1}}, "tolerances.speed"),
        ({"budgets": {"max_iter": 0}}, "budgets.max_iter"),
        ({"confidence": {"d": 1.0, "h": 2.0}}, "confidence.h"),
        ({"confidence": {"d": -1.0, "h": 0.1}}, "confidence.d"),
        ({"seed": 1.5}, "seed"),
        ({"extra": 1}, "extra"),
    ],
)
def test_field_paths_in_validation_errors(tmp_path, patch, field):
    with pytest.raises(ValidationError) as info:
        sio.load_scenario(write(tmp_path, dict(MINIMAL, **patch)))
    assert info.value.field == field


def test_scenario_round_trips_through_dict(tmp_path):
    sc = sio.load_scenario(SCENARIOS / "bounded_clique.json")
    again = sio.scenario_from_dict(sio.scenario_to_dict(sc))
    np.testing.assert_array_equal(again.network.W, sc.network.W)
    assert again.confidence == sc.confidence and again.mode == "bounded"


# --- trajectories ------------------------------------------------------------


def test_empty_trajectory_is_header_only(tmp_path):
    p = tmp_path / "t.csv"
    sio.write_trajectory(None, p, n=2)
    assert p.read_text() == "issue,k,agent_0,agent_1\n"


def test_three_step_run_has_four_rows(tmp_path):
    sc = sio.load_scenario(write(tmp_path, dict(MINIMAL, xi=[1.0, 1.0])))
    traj = simulate_single_issue(sc.network, sc.x0, max_iter=3, record_full=True)
    p = tmp_path / "t.csv"
    sio.write_trajectory(traj, p)
    header, rows = sio.read_trajectory(p)
    assert header == ["issue", "k", "agent_0", "agent_1"]
    assert [(i, k) for i, k, _ in rows] == [(0, 0), (0, 1), (0, 2), (0, 3)]


def test_csv_round_trip_is_exact(tmp_path):
    fx = sio.load_scenario(SCENARIOS / "periodic_but_convergent.json")
    traj = simulate_single_issue(fx.network, fx.x0, record_full=True)
    p = tmp_path / "t.csv"
    sio.write_trajectory(traj, p)
    _, rows = sio.read_trajectory(p)
    for (_, _, x), s in zip(rows, traj.states):
        np.testing.assert_array_equal(x, s.x)


def test_writes_leave_no_temporary_files(tmp_path):
    sio.write_report({"a": 1}, tmp_path / "r.json")
    assert os.listdir(tmp_path) == ["r.json"]


# --- report -------------------------------------------------------------------


def test_every_verdict_has_a_witness_or_a_reason():
    for path in sorted(SCENARIOS.glob("*.json")):
        rep = sio.analyze(sio.load_scenario(path))
        for key in ("theorem2", "corollary1", "assumption3", "theorem3"):
            entry = rep[key]
            assert ("holds" in entry) or entry.get("applicable") is True or \
                entry["note"].startswith("not applicable (")


def test_report_records_clause_asymmetry_and_tolerances():
    rep = sio.analyze(sio.load_scenario(SCENARIOS / "bounded_clique.json"))
    assert rep["assumption3"]["holds"] and rep["theorem3"]["consensus"]
    assert "asymmetry" in rep["assumption3"]["note"]
    assert rep["tolerances"] == {"step_tol": 1e-10, "consensus_tol": 1e-6, "cluster_tol": 1e-6}


# --- command line -------------------------------------------------------------


def test_analyze_ring_reference_reports_consensus(tmp_path, capsys):
    assert cli.run_cli(["analyze", str(SCENARIOS / "ring_consensus.json")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["theorem2"]["consensus"] is True
    assert rep["psi"]["support_match"] is True


def test_simulate_non_convergent_scenario_exits_cleanly(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code = cli.run_cli(["simulate", str(SCENARIOS / "two_cycle.json"), "--max-iter", "50", "--out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["converged"] is False and summary["status"] == "oscillating"
    assert out.exists()


def test_unknown_flag_exits_one_with_usage(capsys):
    assert cli.run_cli(["simulate", "x.json", "--bogus"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_invalid_scenario_exits_one(tmp_path, capsys):
    p = write(tmp_path, dict(MINIMAL, W=[[0, 1], [1, 0.05]]))
    assert cli.run_cli(["analyze", str(p)]) == 1
    assert "W[1]" in capsys.readouterr().err


def test_singular_sequence_exits_two(capsys):
    assert cli.run_cli(["sequence", str(SCENARIOS / "two_cycle.json")]) == 2
    assert "SingularSystem" in capsys.readouterr().err


def test_bounded_without_confidence_exits_one(capsys):
    assert cli.run_cli(["bounded", str(SCENARIOS / "two_agent.json")]) == 1


def test_sequence_and_bounded_write_issue_rows(tmp_path, capsys):
    out = tmp_path / "seq.csv"
    assert cli.run_cli(["sequence", str(SCENARIOS / "two_agent.json"), "--out", str(out), "--record-full"]) == 0
    _, rows = sio.read_trajectory(out)
    assert [i for i, _, _ in rows] == list(range(len(rows)))
    rep = tmp_path / "b.json"
    assert cli.run_cli(["bounded", str(SCENARIOS / "bounded_clique.json"), "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert data["outcome"] == "consensus" and data["edge_preservation"] is True


def test_overrides_are_validated(capsys):
    assert cli.run_cli(["simulate", str(SCENARIOS / "two_agent.json"), "--tol", "-1"]) == 1


def test_verify_reports_and_seed_parsing(tmp_path, capsys):
    rep = tmp_path / "v.json"
    assert cli.run_cli(["verify", "--suites", "psi_support,augmented", "--seeds", "0..4", "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert [s["name"] for s in data["suites"]] == ["psi_support", "augmented"]
    assert data["suites"][0]["cases"] == 5
    assert cli.run_cli(["verify", "--seeds", "4..1"]) == 1
    assert cli.run_cli(["verify", "--suites", "nonsense"]) == 1


def test_verify_disagreement_exits_three(monkeypatch, capsys):
    def broken(seeds):
        r = suites.SuiteResult("broken", cases=1)
        r.disagreements.append({"seed": 0})
        return r

    monkeypatch.setitem(suites.SUITES, "psi_support", broken)
    assert cli.run_cli(["verify", "--suites", "psi_support", "--seeds", "0..0"]) == 3


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.run_cli(["analyze", str(SCENARIOS / "bounded_clique.json"), "--report", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()

import dataclasses
import json
import os
import subprocess
import sys

import pytest

from chainplan import BUNDLED, bundled_scenario_path
from chainplan.cli import main
from chainplan.geometry import PlanarPose
from chainplan.scenario import (Scenario, ScenarioError, load_scenario, read_json,
                                save_scenario)


@pytest.fixture(scope="module")
def planned(tmp_path_factory):
    out = tmp_path_factory.mktemp("plan")
    code = main(["plan", str(bundled_scenario_path("elbow_flip")), "--out", str(out), "--seed", "7"])
    return code, out


def test_bundled_scenarios_load():
    for name in BUNDLED:
        sc = load_scenario(bundled_scenario_path(name))
        assert sc.name == name
    with pytest.raises(KeyError):
        bundled_scenario_path("nope")


def test_round_trip(elbow_flip, tmp_path):
    save_scenario(elbow_flip, tmp_path / "s.json")
    again = load_scenario(tmp_path / "s.json")
    assert again.to_json() == elbow_flip.to_json()
    assert again.start == elbow_flip.start and again.goal == elbow_flip.goal


def test_validation_errors(elbow_flip):
    d = elbow_flip.to_json()
    with pytest.raises(ScenarioError, match="schema_version"):
        Scenario.from_json({**d, "schema_version": "9"})
    bad = json.loads(json.dumps(d))
    bad["start"]["arms"][0][0] += 0.1
    with pytest.raises(ScenarioError, match="chain-closed"):
        Scenario.from_json(bad)
    bad = json.loads(json.dumps(d))
    bad["start"]["arms"][0] = bad["start"]["arms"][0][:2]
    with pytest.raises(ScenarioError, match="expects 3 joints"):
        Scenario.from_json(bad)
    with pytest.raises(ScenarioError, match="bad params"):
        Scenario.from_json({**d, "params": {"R_max": -1}})
    with pytest.raises(ScenarioError):
        Scenario.from_json({k: v for k, v in d.items() if k != "world"})


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"schema_version": "1",\n  "world": }')
    with pytest.raises(ScenarioError, match="line 2 column"):
        read_json(p)
    assert main(["plan", str(p), "--out", str(tmp_path)]) == 3
    assert main(["check", str(tmp_path / "missing.json"), str(p)]) == 3


def test_plan_ok(planned):
    code, out = planned
    assert code == 0
    stats = json.loads((out / "stats.json").read_text())
    plan = json.loads((out / "plan.json").read_text())
    assert stats["status"] == "OK" and stats["seed"] == 7
    assert stats["regrasps"] == sum(p["type"] == "ik_switch" for p in plan["phases"]) == 1
    assert set(stats) == {"schema_version", "status", "seed", "R_max", "N_max", "iterations", "vertices",
                          "failures", "regrasps", "global_planning_s", "regrasp_planning_s",
                          "total_s"}


def test_plan_zero_budget(tmp_path):
    code = main(["plan", str(bundled_scenario_path("elbow_flip")), "--out", str(tmp_path),
                 "--rmax", "0", "--nmax", "100"])
    assert code == 2
    assert json.loads((tmp_path / "stats.json").read_text())["status"] == "FAILURE"
    assert not (tmp_path / "plan.json").exists()


def test_plan_no_goal_ik(elbow_flip, tmp_path):
    sc = dataclasses.replace(elbow_flip, goal=PlanarPose(3.0, 3.0, 0.0))
    save_scenario(sc, tmp_path / "far.json")
    assert main(["plan", str(tmp_path / "far.json"), "--out", str(tmp_path)]) == 4


def test_check_and_tamper(planned, tmp_path):
    _, out = planned
    sc = str(bundled_scenario_path("elbow_flip"))
    assert main(["check", str(out / "plan.json"), sc]) == 0
    d = json.loads((out / "plan.json").read_text())
    d["phases"][-1]["waypoints"][-1]["arms"][1][0] += 0.1
    (tmp_path / "bad.json").write_text(json.dumps(d))
    assert main(["check", str(tmp_path / "bad.json"), sc]) == 5
    d["schema_version"] = "0"
    (tmp_path / "bad.json").write_text(json.dumps(d))
    assert main(["check", str(tmp_path / "bad.json"), sc]) == 3


def test_render_and_simulate(planned, tmp_path):
    _, out = planned
    sc = str(bundled_scenario_path("elbow_flip"))
    assert main(["render", str(out / "plan.json"), sc, "--out", str(tmp_path / "f"), "--fps", "0.05"]) == 0
    assert sorted(p.name for p in (tmp_path / "f").iterdir())[0] == "frame_00000.svg"
    assert main(["simulate", str(out / "plan.json"), sc, "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "simulate.json").read_text())
    assert summary["aborted"] is None
    assert summary["steady_state_force_error"] * 10 < summary["max_force_error"]
    assert main(["simulate", str(out / "plan.json"), sc, "--out", str(tmp_path), "--kv", "1e-4"]) == 6


def test_console_script_audit_logging(tmp_path):
    env = dict(os.environ, CHAINPLAN_LOG="audit")
    r = subprocess.run([sys.executable, "-m", "chainplan.cli", "plan", str(bundled_scenario_path("elbow_flip")),
                        "--out", str(tmp_path), "--seed", "7"], env=env, capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert "audit ok" in r.stderr

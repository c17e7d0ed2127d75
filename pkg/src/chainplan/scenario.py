"""Scenario files: world, grasps, start composite, goal pose and planner overrides."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import PlanarPose, pose_from_json, pose_to_json
from .params import PlannerParams
from .world import CompositeConfig, WorldDescription, collision_report, grasp_residual

SCHEMA_VERSION = "1"
RESIDUAL_TOL = 1e-8


class ScenarioError(ValueError):
    """Malformed or invalid scenario/plan input."""


@dataclass
class Scenario:
    world: WorldDescription
    grasps: tuple
    start: CompositeConfig
    goal: PlanarPose
    params: dict = field(default_factory=dict)
    name: str = ""

    def planner_params(self, **overrides) -> PlannerParams:
        base = PlannerParams.from_json(self.params)
        return base.override(**overrides)

    def validate(self) -> None:
        k = len(self.world.arms)
        if len(self.grasps) != k or len(self.start.arm_configs) != k:
            raise ScenarioError(f"expected {k} grasps and {k} arm configurations")
        for arm, q in zip(self.world.arms, self.start.arm_configs):
            if len(q) != arm.dof:
                raise ScenarioError(f"arm {arm.name or '?'} expects {arm.dof} joints, got {len(q)}")
            if not arm.within_limits(q):
                raise ScenarioError("start configuration violates joint limits")
        res = grasp_residual(self.start, self.grasps, self.world)
        if max(res) > RESIDUAL_TOL:
            raise ScenarioError(f"start is not chain-closed (residuals {res})")
        hit = collision_report(self.start, self.world)
        if hit is not None:
            raise ScenarioError(f"start configuration in collision: {hit}")
        try:
            self.planner_params()
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"bad params: {exc}") from None

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "world": self.world.to_json(),
            "grasps": [pose_to_json(g) for g in self.grasps],
            "start": self.start.to_json(),
            "goal": pose_to_json(self.goal),
            "params": self.params,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict):
            raise ScenarioError("scenario must be a JSON object")
        if str(d.get("schema_version")) != SCHEMA_VERSION:
            raise ScenarioError(f"unsupported scenario schema_version {d.get('schema_version')!r}")
        try:
            sc = cls(
                world=WorldDescription.from_json(d["world"]),
                grasps=tuple(pose_from_json(g) for g in d["grasps"]),
                start=CompositeConfig.from_json(d["start"]),
                goal=pose_from_json(d["goal"]),
                params=dict(d.get("params", {})),
                name=str(d.get("name", "")),
            )
        except ScenarioError:
            raise
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ScenarioError(f"invalid scenario: {exc!r}") from None
        sc.validate()
        return sc


def read_json(path) -> dict:
    """Parse a JSON file; syntax errors become ScenarioError with line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def dump_json(d, path, indent: int | None = None) -> None:
    """Write ``d`` with sorted keys; floats use the shortest round-tripping repr."""
    seps = (",", ":") if indent is None else (",", ": ")
    Path(path).write_text(json.dumps(d, indent=indent, sort_keys=True, separators=seps) + "\n")


def load_scenario(path) -> Scenario:
    return Scenario.from_json(read_json(path))


def save_scenario(sc: Scenario, path) -> None:
    dump_json(sc.to_json(), path, indent=1)

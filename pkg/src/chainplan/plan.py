"""Composite plans: closed-chain segments interleaved with IK-switch actions."""
from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import PlanarPose, pose_from_json, pose_to_json
from .world import CompositeConfig

SCHEMA_VERSION = "1"


@dataclass
class ArmSwitch:
    """One arm letting go, swinging to another IK solution of the same grasp, and regrasping.

    ``before``/``after`` are the composite configurations at the placement
    just before the release and just after the regrasp.
    """
    arm: int
    before: CompositeConfig
    after: CompositeConfig
    retreat: list     # joint configs, grasp -> retreated
    swing: list       # joint configs, retreated (old class) -> retreated (new class)
    approach: list    # joint configs, retreated -> grasp

    def joint_path(self) -> list:
        return list(self.retreat) + list(self.swing[1:]) + list(self.approach[1:])

    def reversed(self) -> "ArmSwitch":
        return ArmSwitch(self.arm, self.after, self.before, list(reversed(self.approach)),
                         list(reversed(self.swing)), list(reversed(self.retreat)))


@dataclass
class RegraspAction:
    place: PlanarPose
    go: list          # composite path, pre-switch config -> placement
    switches: list    # ArmSwitch, in execution order
    back: list        # composite path, placement -> post-switch config

    def reversed(self) -> "RegraspAction":
        return RegraspAction(self.place, list(reversed(self.back)),
                             [s.reversed() for s in reversed(self.switches)],
                             list(reversed(self.go)))

    @property
    def arms(self) -> list[int]:
        return [s.arm for s in self.switches]


@dataclass
class ClosedChainSegment:
    waypoints: list


@dataclass
class IkSwitchAction:
    vertex: object    # id of the vertex (or "connect") that hosted the switch
    action: RegraspAction


@dataclass
class CompositePlan:
    phases: list = field(default_factory=list)

    @property
    def switch_count(self) -> int:
        return sum(1 for p in self.phases if isinstance(p, IkSwitchAction))

    def first_config(self) -> CompositeConfig:
        p = self.phases[0]
        return p.waypoints[0] if isinstance(p, ClosedChainSegment) else p.action.go[0]

    def last_config(self) -> CompositeConfig:
        p = self.phases[-1]
        return p.waypoints[-1] if isinstance(p, ClosedChainSegment) else p.action.back[-1]

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "phases": [_phase_json(p) for p in self.phases]}

    @classmethod
    def from_json(cls, d: dict) -> "CompositePlan":
        if str(d.get("schema_version")) != SCHEMA_VERSION:
            raise ValueError(f"unsupported plan schema_version {d.get('schema_version')!r}")
        return cls([_phase_from_json(p) for p in d["phases"]])


def _cc(c: CompositeConfig) -> dict:
    return c.to_json()


def _phase_json(p) -> dict:
    if isinstance(p, ClosedChainSegment):
        return {"type": "closed_chain", "waypoints": [_cc(c) for c in p.waypoints]}
    a = p.action
    steps = [{"phase": "go", "waypoints": [_cc(c) for c in a.go]}]
    for s in a.switches:
        steps += [
            {"phase": "open", "arm": s.arm, "config": _cc(s.before)},
            {"phase": "retreat", "arm": s.arm, "joints": [list(q) for q in s.retreat]},
            {"phase": "swing", "arm": s.arm, "joints": [list(q) for q in s.swing]},
            {"phase": "approach", "arm": s.arm, "joints": [list(q) for q in s.approach]},
            {"phase": "close", "arm": s.arm, "config": _cc(s.after)},
        ]
    steps.append({"phase": "back", "waypoints": [_cc(c) for c in a.back]})
    return {"type": "ik_switch", "vertex": p.vertex, "arms": a.arms,
            "place": pose_to_json(a.place), "steps": steps}


def _phase_from_json(d: dict):
    if d["type"] == "closed_chain":
        return ClosedChainSegment([CompositeConfig.from_json(c) for c in d["waypoints"]])
    if d["type"] != "ik_switch":
        raise ValueError(f"unknown phase type {d['type']!r}")
    go = back = None
    switches = []
    cur = {}
    for st in d["steps"]:
        ph = st["phase"]
        if ph == "go":
            go = [CompositeConfig.from_json(c) for c in st["waypoints"]]
        elif ph == "back":
            back = [CompositeConfig.from_json(c) for c in st["waypoints"]]
        elif ph == "open":
            cur = {"arm": st["arm"], "before": CompositeConfig.from_json(st["config"])}
        elif ph in ("retreat", "swing", "approach"):
            cur[ph] = [tuple(q) for q in st["joints"]]
        elif ph == "close":
            cur["after"] = CompositeConfig.from_json(st["config"])
            switches.append(ArmSwitch(cur["arm"], cur["before"], cur["after"], cur["retreat"],
                                      cur["swing"], cur["approach"]))
        else:
            raise ValueError(f"unknown switch phase {ph!r}")
    if go is None or back is None:
        raise ValueError("ik_switch phase needs go and back steps")
    return IkSwitchAction(d.get("vertex"), RegraspAction(pose_from_json(d["place"]), go, switches, back))

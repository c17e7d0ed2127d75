"""Replay a plan against its scenario and report every violated condition."""
from __future__ import annotations

from dataclasses import dataclass

from .equilibrium import environment_contacts, placement_equilibrium
from .geometry import compose, pose_distance
from .kinematics import forward_kinematics
from .params import PlannerParams
from .plan import ClosedChainSegment, CompositePlan
from .scenario import Scenario
from .world import collision_report, grasp_residual

RESIDUAL_TOL = 1e-8
MATCH_TOL = 1e-9


@dataclass
class Violation:
    phase: int
    kind: str
    message: str

    def __str__(self) -> str:
        return f"phase {self.phase}: {self.kind}: {self.message}"


def _max_joint_gap(a, b) -> float:
    return max(abs(x - y) for qa, qb in zip(a.arm_configs, b.arm_configs) for x, y in zip(qa, qb))


def _configs_match(a, b) -> bool:
    return (pose_distance(a.object_pose, b.object_pose) <= MATCH_TOL
            and _max_joint_gap(a, b) <= MATCH_TOL)


class _Replay:
    def __init__(self, sc: Scenario, params: PlannerParams):
        self.sc = sc
        self.world = sc.world
        self.G = sc.grasps
        self.params = params
        self.out: list[Violation] = []
        self.phase = 0

    def bad(self, kind: str, msg: str) -> None:
        self.out.append(Violation(self.phase, kind, msg))

    def chain(self, wps, label: str, allow_contact: bool) -> None:
        # a step may not exceed the path discretization (plus bisection slack)
        max_pose = self.params.step * (1 + 1e-9) + 1e-12
        max_joint = self.params.ik.max_step + 1e-9
        for i, c in enumerate(wps):
            res = max(grasp_residual(c, self.G, self.world))
            if res > RESIDUAL_TOL:
                self.bad("RESIDUAL", f"{label} waypoint {i}: grasp residual {res:.3e}")
            hit = collision_report(c, self.world, allow_contact)
            if hit:
                self.bad("COLLISION", f"{label} waypoint {i}: {hit}")
            if i:
                d = pose_distance(wps[i - 1].object_pose, c.object_pose, self.params.w_rot)
                if d > max_pose or _max_joint_gap(wps[i - 1], c) > max_joint:
                    self.bad("CONTINUITY", f"{label} waypoints {i - 1}->{i} jump")

    def switch(self, a) -> None:
        T = a.place
        k = len(self.world.arms)
        if not environment_contacts(T, self.world):
            self.bad("EQUILIBRIUM", "placement pose does not touch any support")
        for s in a.switches:
            others = [i for i in range(k) if i != s.arm]
            if not placement_equilibrium(T, self.world, self.G, others):
                self.bad("EQUILIBRIUM", f"object not in equilibrium with arm {s.arm} released")
        self.chain(a.go, "go", True)
        self.chain(a.back, "back", True)
        if pose_distance(a.go[-1].object_pose, T) > MATCH_TOL:
            self.bad("CONTINUITY", "go does not end at the placement")
        cur = a.go[-1]
        for s in a.switches:
            if not _configs_match(s.before, cur):
                self.bad("CONTINUITY", f"arm {s.arm} switch does not start where the previous step ended")
            self.regrasp(s, T)
            cur = s.after
        if not _configs_match(cur, a.back[0]):
            self.bad("CONTINUITY", "back does not start at the post-switch configuration")

    def regrasp(self, s, T) -> None:
        k = len(self.world.arms)
        i = s.arm
        path = s.joint_path()
        if s.before.object_pose != T or s.after.object_pose != T:
            self.bad("PARKED", f"object moves during the arm {i} switch")
        if max(abs(x - y) for x, y in zip(path[0], s.before.arm_configs[i])) > MATCH_TOL:
            self.bad("CONTINUITY", f"arm {i} regrasp path does not start at the grasp")
        if max(abs(x - y) for x, y in zip(path[-1], s.after.arm_configs[i])) > MATCH_TOL:
            self.bad("CONTINUITY", f"arm {i} regrasp path does not end at the regrasp")
        for j in range(k):
            if j != i and s.before.arm_configs[j] != s.after.arm_configs[j]:
                self.bad("PARKED", f"arm {j} moves while arm {i} switches")
        target = compose(T, self.G[i])
        for q, label in ((s.before.arm_configs[i], "release"), (s.after.arm_configs[i], "regrasp")):
            err = pose_distance(forward_kinematics(self.world.arms[i], q), target)
            if err > RESIDUAL_TOL:
                self.bad("RESIDUAL", f"arm {i} {label} pose off the grasp by {err:.3e}")
        arm = self.world.arms[i]
        free = [j != i for j in range(k)]
        near = set(range(len(s.retreat) - 1)) | {len(path) - 1 - m for m in range(len(s.approach) - 1)}
        res = self.params.regrasp_resolution + 1e-9
        for n, q in enumerate(path):
            if not arm.within_limits(q):
                self.bad("LIMIT", f"arm {i} regrasp waypoint {n} outside joint limits")
            c = s.before.with_arm(i, q)
            hit = collision_report(c, self.world, True, [True] * k if n in near else free)
            if hit:
                self.bad("COLLISION", f"arm {i} regrasp waypoint {n}: {hit}")
            if n and max(abs(x - y) for x, y in zip(path[n - 1], q)) > max(res, self.params.ik.max_step):
                self.bad("CONTINUITY", f"arm {i} regrasp waypoints {n - 1}->{n} jump")


def check_plan(plan: CompositePlan, sc: Scenario, params: PlannerParams | None = None) -> list[Violation]:
    """All violations found while replaying ``plan``; empty means valid."""
    params = sc.planner_params() if params is None else params
    r = _Replay(sc, params)
    if not plan.phases:
        r.bad("EMPTY", "plan has no phases")
        return r.out
    if not _configs_match(plan.first_config(), sc.start):
        r.bad("ENDPOINT", "plan does not start at the scenario start")
    prev = None
    for n, p in enumerate(plan.phases):
        r.phase = n
        if isinstance(p, ClosedChainSegment):
            first, last = p.waypoints[0], p.waypoints[-1]
            r.chain(p.waypoints, "segment", False)
        else:
            first, last = p.action.go[0], p.action.back[-1]
            r.switch(p.action)
        if prev is not None and not _configs_match(prev, first):
            r.bad("CONTINUITY", "phase does not start where the previous one ended")
        prev = last
    r.phase = len(plan.phases) - 1
    if pose_distance(plan.last_config().object_pose, sc.goal) > MATCH_TOL:
        r.bad("ENDPOINT", "plan does not end at the goal pose")
    return r.out

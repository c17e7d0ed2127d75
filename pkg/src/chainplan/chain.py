"""Closed-chain path following along an object path, with joint-limit trap detection."""
from __future__ import annotations

from dataclasses import dataclass

from .geometry import PosePath, compose, discretize_path, interpolate_pose_path
from .kinematics import flexibility_score, ik_class, enumerate_ik, is_near_boundary
from .params import PlannerParams
from .world import (ChainBreak, CompositeConfig, GraspSet, WorldDescription, collision_free,
                    compute_composite_config)

REACHED = "REACHED"
NEED_REGRASP = "NEED_REGRASP"
TRAPPED = "TRAPPED"


@dataclass
class PathResult:
    status: str
    waypoints: list            # chain-closed configs, first is c_start
    c_regrasp: CompositeConfig | None = None
    arm: int | None = None     # arm whose IK failed (NEED_REGRASP and most TRAPPED cases)
    kind: str | None = None


def get_regrasp_config(c: CompositeConfig, index: int, G: GraspSet, world: WorldDescription,
                       allow_contact: bool = False) -> CompositeConfig | None:
    """Swap arm ``index`` to its most flexible IK solution in another class.

    Candidates in the arm's current class are skipped; so are those leaving
    the composite in collision. Returns None when nothing remains.
    """
    arm = world.arms[index]
    sols = enumerate_ik(arm, compose(c.object_pose, G[index]))
    cur = ik_class(c.arm_configs[index])
    cands = [q for q in sols if ik_class(q) != cur]
    # stable sort keeps enumeration order on ties
    cands.sort(key=lambda q: -flexibility_score(arm, q))
    for q in cands:
        out = c.with_arm(index, q)
        if collision_free(out, world, allow_contact):
            return out
    return None


def compute_path(c_start: CompositeConfig, path: PosePath, G: GraspSet, world: WorldDescription,
                 params: PlannerParams, allow_contact: bool = False) -> PathResult:
    """Drive the closed chain along ``path``.

    A failing step is bisected ``params.refine_depth`` times so the last
    reached configuration sits as close to the obstruction as possible; the
    failing arm is then tested against its joint limits to tell a joint-limit
    trap (NEED_REGRASP, with the switched configuration) from other failures
    (TRAPPED).
    """
    out = [c_start]
    if path.length(params.w_rot) == 0.0:
        return PathResult(REACHED, out)
    poses = discretize_path(path, params.step, params.w_rot)
    prev = c_start
    for T in poses[1:]:
        try:
            prev = compute_composite_config(prev, T, G, world, params.ik, allow_contact)
            out.append(prev)
            continue
        except ChainBreak as exc:
            brk = exc
        hi = T
        for _ in range(params.refine_depth):
            mid = interpolate_pose_path(prev.object_pose, hi, params.w_rot).eval(0.5)
            try:
                prev = compute_composite_config(prev, mid, G, world, params.ik, allow_contact)
                out.append(prev)
            except ChainBreak as exc:
                brk = exc
                hi = mid
        if brk.index is None:
            return PathResult(TRAPPED, out, kind=brk.kind)
        _, near = is_near_boundary(world.arms[brk.index], prev.arm_configs[brk.index],
                                   params.eps_boundary)
        if near:
            c_regrasp = get_regrasp_config(prev, brk.index, G, world, allow_contact)
            if c_regrasp is not None:
                return PathResult(NEED_REGRASP, out, c_regrasp, brk.index, brk.kind)
        return PathResult(TRAPPED, out, arm=brk.index, kind=brk.kind)
    return PathResult(REACHED, out)

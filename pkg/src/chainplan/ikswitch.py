"""Stage 2: turn every IK-switch request on the global path into concrete motions.

For a flagged switch the object is carried to a nearby resting placement
(closed chain, pre-switch IK classes), each switching arm lets go, swings in
joint space to its other IK solution of the very same grasp and regrasps,
and the chain carries the object back in the post-switch classes.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from .chain import REACHED, compute_path
from .equilibrium import sample_placement_config
from .geometry import PlanarPose, compose, interpolate_pose_path
from .kinematics import IKFailure, differential_ik_step
from .params import PlannerParams
from .plan import ArmSwitch, RegraspAction
from .tree import Connection, Tree, global_edges
from .world import CompositeConfig, GraspSet, WorldDescription, collision_free

log = logging.getLogger("chainplan.ikswitch")

OK = "OK"
GO_FAILED = "GO_FAILED"
BACK_FAILED = "BACK_FAILED"

SAME_TOL = 1e-6  # joint configs closer than this count as the same IK solution


def compute_path2(c_pre: CompositeConfig, T_place: PlanarPose, c_post: CompositeConfig,
                  G: GraspSet, world: WorldDescription, params: PlannerParams):
    """Closed-chain legs to the placement (pre-switch classes) and back (post-switch classes).

    Returns ``(status, P_go, P_back)``; P_back ends exactly at ``c_post``.
    """
    T_v = c_pre.object_pose
    path = interpolate_pose_path(T_v, T_place, params.w_rot)
    go = compute_path(c_pre, path, G, world, params, allow_contact=True)
    if go.status != REACHED:
        return GO_FAILED, None, None
    back = compute_path(c_post, interpolate_pose_path(c_post.object_pose, T_place, params.w_rot),
                        G, world, params, allow_contact=True)
    if back.status != REACHED:
        return BACK_FAILED, None, None
    return OK, go.waypoints, list(reversed(back.waypoints))


def _straight_line(arm, q0, start: PlanarPose, end: PlanarPose, steps: int, ik):
    path = interpolate_pose_path(start, end)
    out = [tuple(q0)]
    for i in range(1, steps + 1):
        try:
            out.append(differential_ik_step(arm, out[-1], path.eval(i / steps), ik))
        except IKFailure:
            return None
    return out


def _densify(path: list, res: float) -> list:
    out = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        n = max(1, math.ceil(max(abs(x - y) for x, y in zip(a, b)) / res))
        for i in range(1, n + 1):
            out.append(b if i == n else tuple(x + (y - x) * i / n for x, y in zip(a, b)))
    return out


def birrt(q_a, q_b, valid, lower, upper, rng: np.random.Generator, iters: int = 3000,
          step: float = 0.3, resolution: float = 0.02, shortcut_attempts: int = 100):
    """Joint-space RRT-Connect between two valid configurations.

    Returns a densified path (consecutive waypoints within ``resolution`` in
    every joint) or None.
    """
    q_a, q_b = tuple(q_a), tuple(q_b)
    if q_a == q_b:
        return [q_a]
    if not valid(q_a) or not valid(q_b):
        return None
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)

    def edge_ok(a, b):
        n = math.ceil(max(abs(x - y) for x, y in zip(a, b)) / resolution)
        return all(valid(tuple(x + (y - x) * i / n for x, y in zip(a, b))) for i in range(1, n))

    path = None
    if edge_ok(q_a, q_b):
        path = [q_a, q_b]
    else:
        trees = [([q_a], [None]), ([q_b], [None])]

        def nearest(tree, q):
            nodes = np.asarray(tree[0])
            return int(np.argmin(((nodes - q) ** 2).sum(axis=1)))

        def steer(tree, target):
            i = nearest(tree, target)
            q_near = np.asarray(tree[0][i])
            d = np.asarray(target) - q_near
            dist = float(np.linalg.norm(d))
            q_new = tuple(target) if dist <= step else tuple(q_near + d * (step / dist))
            if valid(q_new) and edge_ok(tuple(q_near), q_new):
                tree[0].append(q_new)
                tree[1].append(i)
                return len(tree[0]) - 1, q_new == tuple(target)
            return None, False

        def trace(tree, i):
            out = []
            while i is not None:
                out.append(tree[0][i])
                i = tree[1][i]
            return out

        for it in range(iters):
            ta, tb = trees[it % 2], trees[(it + 1) % 2]
            q_rand = tuple(lower + (upper - lower) * rng.random(len(lower)))
            ia, _ = steer(ta, q_rand)
            if ia is None:
                continue
            target = ta[0][ia]
            while True:
                ib, reached = steer(tb, target)
                if ib is None:
                    break
                if reached:
                    pa, pb = trace(ta, ia), trace(tb, ib)
                    path = list(reversed(pa)) + pb[1:]
                    if path[0] != q_a:
                        path = list(reversed(path))
                    break
            if path is not None:
                break
    if path is None:
        return None
    for _ in range(shortcut_attempts):
        if len(path) < 3:
            break
        i, j = sorted(rng.choice(len(path), 2, replace=False))
        if j - i < 2:
            continue
        if edge_ok(path[i], path[j]):
            path = path[:i + 1] + path[j:]
    return _densify(path, resolution)


def plan_regrasp_path(index: int, before: CompositeConfig, q_to, G: GraspSet,
                      world: WorldDescription, rng: np.random.Generator,
                      params: PlannerParams) -> ArmSwitch | None:
    """Release arm ``index``, retreat, swing to ``q_to``'s IK branch, approach and regrasp.

    The object and the other arms stay as in ``before`` throughout.
    """
    arm = world.arms[index]
    q_from = before.arm_configs[index]
    q_to = tuple(q_to)
    after = before.with_arm(index, q_to)
    if q_from == q_to:
        return ArmSwitch(index, before, after, [q_from], [q_from], [q_from])
    k = len(world.arms)
    free = [j != index for j in range(k)]

    def valid(q, grasping=False):
        g = free if not grasping else [True] * k
        return collision_free(before.with_arm(index, q), world, allow_contact=True, grasping=g)

    grasp = compose(before.object_pose, G[index])
    retreat_pose = compose(grasp, PlanarPose(-params.retreat, 0.0, 0.0))
    retreat = _straight_line(arm, q_from, grasp, retreat_pose, params.retreat_steps, params.ik)
    approach = _straight_line(arm, q_to, grasp, retreat_pose, params.retreat_steps, params.ik)
    if retreat is None or approach is None:
        return None
    approach.reverse()
    for q in retreat[1:-1] + approach[1:-1] + [q_to]:
        if not valid(q, grasping=True):
            return None
    swing = birrt(retreat[-1], approach[0], valid, arm.q_lower, arm.q_upper, rng,
                  params.regrasp_iters, params.regrasp_step, params.regrasp_resolution,
                  params.shortcut_attempts)
    if swing is None:
        return None
    return ArmSwitch(index, before, after, retreat, swing, approach)


def _released_arms(pre: CompositeConfig, post: CompositeConfig) -> list[int]:
    return [i for i, (a, b) in enumerate(zip(pre.arm_configs, post.arm_configs))
            if max(abs(x - y) for x, y in zip(a, b)) > SAME_TOL]


def plan_switch(pre: CompositeConfig, post: CompositeConfig, G: GraspSet, world: WorldDescription,
                rng: np.random.Generator, params: PlannerParams, stats: dict | None = None):
    """Plan one IK-switch between ``pre`` and ``post`` (same object pose).

    Returns a RegraspAction, or None once the attempts are exhausted or no
    placement can be found.
    """
    released = _released_arms(pre, post)
    for attempt in range(params.switch_attempts):
        T_place = sample_placement_config(pre.object_pose, world, G, rng, released, params.placement)
        if T_place is None:
            log.debug("no placement near %s", pre.object_pose)
            return None
        status, go, back = compute_path2(pre, T_place, post, G, world, params)
        if status != OK:
            log.debug("attempt %d: %s", attempt, status)
            continue
        cur = go[-1]
        switches = []
        for r in released:
            sw = plan_regrasp_path(r, cur, back[0].arm_configs[r], G, world, rng, params)
            if sw is None:
                break
            switches.append(sw)
            cur = sw.after
        else:
            return RegraspAction(T_place, go, switches, [cur] + back[1:])
        log.debug("attempt %d: regrasp path failed", attempt)
    return None


def plan_ik_switch(t_start: Tree, t_goal: Tree, conn: Connection, G: GraspSet,
                   world: WorldDescription, rng: np.random.Generator, params: PlannerParams,
                   stats: dict | None = None):
    """Plan every pending switch along the global path, start side first.

    Returns ``(True, None)`` or ``(False, failed_host)`` where the host is a
    tree vertex or the connection.
    """
    for host, _, _, _ in global_edges(t_start, t_goal, conn):
        if not host.need_regrasp or host.has_regrasp:
            continue
        pre, post = host.switch_pair()
        action = plan_switch(pre, post, G, world, rng, params)
        if action is None:
            return False, host
        host.regrasp_action = action
        host.has_regrasp = True
    return True, None

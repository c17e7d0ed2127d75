"""Stage 1: bidirectional tree search over object poses, with stage-2 handoff."""
from __future__ import annotations

import itertools
import logging
import time

import numpy as np

from .chain import NEED_REGRASP, REACHED, compute_path
from .geometry import PlanarPose, interpolate_pose_path, pose_distance, sample_object_pose
from .ikswitch import plan_ik_switch
from .kinematics import flexibility_score
from .params import PlannerParams
from .plan import ClosedChainSegment, CompositePlan, IkSwitchAction
from .tree import Connection, Tree, TreeVertex, audit_tree, global_edges, reorganize
from .world import (CompositeConfig, GraspSet, WorldDescription, closing_configs, collision_free,
                    is_chain_closed, project)

log = logging.getLogger("chainplan.planner")

FAILURE = "FAILURE"
NO_GOAL_IK = "NO_GOAL_IK"

SNAP_TOL = 1e-6


class PlanningFailure(Exception):
    def __init__(self, kind: str, message: str = "", stats: dict | None = None):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind
        self.stats = stats or {}


def select_goal_composite(T_goal: PlanarPose, G: GraspSet, world: WorldDescription,
                          heuristic: str, rng: np.random.Generator,
                          c_start: CompositeConfig | None = None) -> CompositeConfig:
    sols = closing_configs(T_goal, G, world)
    for i, s in enumerate(sols):
        if not s:
            raise PlanningFailure(NO_GOAL_IK, f"arm {i} cannot reach its grasp at the goal")
    cands = [CompositeConfig(combo, T_goal) for combo in itertools.product(*sols)]
    cands = [c for c in cands if collision_free(c, world)]
    if not cands:
        raise PlanningFailure(NO_GOAL_IK, "every goal composite collides")
    if heuristic == "random":
        return cands[int(rng.integers(len(cands)))]
    if heuristic == "most-flexible":
        scores = [sum(flexibility_score(a, q) for a, q in zip(world.arms, c.arm_configs))
                  for c in cands]
        return cands[int(np.argmax(scores))]
    if heuristic == "nearest":
        if c_start is None:
            return cands[0]
        ref = np.concatenate([np.asarray(q) for q in c_start.arm_configs])
        d = [np.linalg.norm(np.concatenate([np.asarray(q) for q in c.arm_configs]) - ref)
             for c in cands]
        return cands[int(np.argmin(d))]
    raise ValueError(f"unknown goal heuristic {heuristic!r}")


def nearest_neighbor(tree: Tree, T: PlanarPose, budget: int, w_rot: float,
                     regrasp_host: bool = False) -> TreeVertex | None:
    """Closest vertex (object-pose metric) with regrasp_count within ``budget``.

    With ``regrasp_host`` set, vertices inside a blacklist ball are skipped too.
    """
    best, best_key = None, None
    for v in tree.vertices.values():
        if v.regrasp_count > budget:
            continue
        T_v = project(v.config)
        if regrasp_host and tree.in_blacklist(T_v, w_rot):
            continue
        key = (pose_distance(T_v, T, w_rot), v.id)
        if best_key is None or key < best_key:
            best, best_key = v, key
    return best


def extend(tree: Tree, T_rand: PlanarPose, params: PlannerParams, G: GraspSet,
           world: WorldDescription) -> TreeVertex | None:
    v_near = nearest_neighbor(tree, T_rand, params.R_max, params.w_rot)
    T_near = project(v_near.config)
    d = pose_distance(T_near, T_rand, params.w_rot)
    if d == 0.0:
        return None
    path = interpolate_pose_path(T_near, T_rand, params.w_rot)
    if d > params.d_ext:
        path = interpolate_pose_path(T_near, path.eval(params.d_ext / d), params.w_rot)
    res = compute_path(v_near.config, path, G, world, params)
    if res.status == REACHED:
        return tree.add_vertex(v_near, res.waypoints[-1], res.waypoints)
    if res.status == NEED_REGRASP and v_near.regrasp_count < params.R_max:
        if tree.in_blacklist(res.c_regrasp.object_pose, params.w_rot):
            return None
        wps = res.waypoints + [res.c_regrasp]
        return tree.add_vertex(v_near, res.c_regrasp, wps, len(wps) - 2)
    return None


def _snap(c: CompositeConfig, ref: CompositeConfig) -> CompositeConfig:
    """Replace arms of ``c`` agreeing with ``ref`` to within SNAP_TOL by ``ref``'s."""
    qs = tuple(r if max(abs(a - b) for a, b in zip(q, r)) <= SNAP_TOL else q
               for q, r in zip(c.arm_configs, ref.arm_configs))
    return CompositeConfig(qs, c.object_pose)


def connect(v_new: TreeVertex, tree_b: Tree, params: PlannerParams, G: GraspSet,
            world: WorldDescription) -> Connection | None:
    T = project(v_new.config)
    budget = params.R_max - v_new.regrasp_count
    v_b = nearest_neighbor(tree_b, T, budget, params.w_rot)
    if v_b is None:
        return None
    path = interpolate_pose_path(project(v_b.config), T, params.w_rot)
    res = compute_path(v_b.config, path, G, world, params)
    if res.status != REACHED:
        return None
    wps = res.waypoints
    # the first waypoint is v_b's own configuration and must stay exact
    end = _snap(wps[-1], v_new.config) if len(wps) > 1 else wps[0]
    if end == v_new.config:
        return Connection(v_new.id, v_b.id, wps[:-1] + [v_new.config])
    if v_new.regrasp_count + v_b.regrasp_count >= params.R_max:
        return None
    if tree_b.in_blacklist(T, params.w_rot):
        return None
    path = wps[:-1] + [end, v_new.config]
    return Connection(v_new.id, v_b.id, path, len(path) - 2, need_regrasp=True)


def assemble_plan(t_start: Tree, t_goal: Tree, conn: Connection) -> CompositePlan:
    phases = []
    seg = [t_start[t_start.root].config]
    for host, path, k, rev in global_edges(t_start, t_goal, conn):
        if k is None:
            seg.extend(path[1:])
            continue
        seg.extend(path[1:k + 1])
        if len(seg) > 1:
            phases.append(ClosedChainSegment(seg))
        action = host.regrasp_action.reversed() if rev else host.regrasp_action
        phases.append(IkSwitchAction(host.id, action))
        seg = list(path[k + 1:])
    if len(seg) > 1 or not phases:
        phases.append(ClosedChainSegment(seg))
    return CompositePlan(phases)


def _audit(trees, what: str) -> None:
    for t in trees:
        problems = audit_tree(t)
        if problems:
            raise AssertionError(f"tree audit failed after {what}: {problems}")
    log.debug("audit ok after %s (%d + %d vertices)", what, len(trees[0]), len(trees[1]))


def plan(c_start: CompositeConfig, T_goal: PlanarPose, params: PlannerParams, G: GraspSet,
         world: WorldDescription, stats: dict | None = None) -> CompositePlan:
    """Plan from ``c_start`` to any goal composite at object pose ``T_goal``.

    Raises PlanningFailure (FAILURE or NO_GOAL_IK). ``stats`` if given is
    filled with iteration counts and timings.
    """
    stats = {} if stats is None else stats
    stats.update(iterations=0, stage2_calls=0, stage2_failures=0,
                 stage1_time=0.0, stage2_time=0.0)
    if not is_chain_closed(c_start, G, world) or not collision_free(c_start, world):
        raise ValueError("start configuration must be chain-closed and collision-free")
    rng = np.random.default_rng(params.seed)
    c_goal = select_goal_composite(T_goal, G, world, params.goal_heuristic, rng, c_start)
    if c_goal.object_pose == c_start.object_pose:
        c_goal = _snap(c_goal, c_start)
    ids = itertools.count()
    blacklist = []
    t_f = Tree(c_start, ids, True, blacklist)
    t_b = Tree(c_goal, ids, False, blacklist)
    t0 = time.perf_counter()
    if params.audit:
        _audit((t_f, t_b), "init")

    conn = connect(t_f[t_f.root], t_b, params, G, world)
    for it in range(params.N_max + 1):
        if conn is None:
            if it == params.N_max:
                break
            stats["iterations"] = it + 1
            T_rand = sample_object_pose(params.bounds, rng)
            v_new = extend(t_f, T_rand, params, G, world)
            if v_new is not None:
                if params.audit:
                    _audit((t_f, t_b), f"extend -> {v_new.id}")
                conn = connect(v_new, t_b, params, G, world)
        if conn is not None:
            t_start, t_goal = (t_f, t_b) if t_f.is_start else (t_b, t_f)
            s0 = time.perf_counter()
            stats["stage2_calls"] += 1
            ok, fail = plan_ik_switch(t_start, t_goal, conn, G, world, rng, params)
            stats["stage2_time"] += time.perf_counter() - s0
            if ok:
                out = assemble_plan(t_start, t_goal, conn)
                stats["stage1_time"] = time.perf_counter() - t0 - stats["stage2_time"]
                stats["vertices"] = len(t_f) + len(t_b)
                stats["switches"] = out.switch_count
                return out
            stats["stage2_failures"] += 1
            log.info("stage 2 failed at %s; reorganizing", getattr(fail, "id", fail))
            reorganize(t_f, t_b, conn, fail, params.r_blacklist)
            if params.audit:
                _audit((t_f, t_b), "reorganize")
            conn = None
        t_f, t_b = t_b, t_f
    stats["stage1_time"] = time.perf_counter() - t0 - stats["stage2_time"]
    stats["vertices"] = len(t_f) + len(t_b)
    raise PlanningFailure(FAILURE, f"no plan within {params.N_max} iterations", stats)

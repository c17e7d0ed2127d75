import itertools

import numpy as np
import pytest

from chainplan.chain import compute_path
from chainplan.equilibrium import placement_equilibrium
from chainplan.geometry import compose, interpolate_pose_path, pose_distance
from chainplan.ikswitch import (OK, birrt, compute_path2, plan_ik_switch, plan_regrasp_path,
                                plan_switch)
from chainplan.kinematics import forward_kinematics, ik_class
from chainplan import testbed
from chainplan.tree import Connection, Tree
from chainplan.world import collision_free, grasp_residual


@pytest.fixture(scope="module")
def switch_pair(elbow_flip):
    r = compute_path(elbow_flip.start, interpolate_pose_path(elbow_flip.start.object_pose, elbow_flip.goal),
                     elbow_flip.grasps, elbow_flip.world, elbow_flip.planner_params())
    return r.waypoints[-1], r.c_regrasp


@pytest.fixture(scope="module")
def action(elbow_flip, switch_pair):
    pre, post = switch_pair
    a = plan_switch(pre, post, elbow_flip.grasps, elbow_flip.world, np.random.default_rng(5),
                    elbow_flip.planner_params())
    assert a is not None
    return a


def test_compute_path2_single_waypoint(elbow_flip, switch_pair):
    pre, post = switch_pair
    status, go, back = compute_path2(pre, pre.object_pose, post, elbow_flip.grasps, elbow_flip.world,
                                     elbow_flip.planner_params())
    assert status == OK and go == [pre] and back == [post]


def test_action_endpoints(elbow_flip, switch_pair, action):
    pre, post = switch_pair
    assert action.go[0] == pre and action.back[-1] == post
    assert action.go[-1].object_pose == action.place
    assert [s.arm for s in action.switches] == [1]
    sw = action.switches[0]
    assert sw.before == action.go[-1] and sw.after == action.back[0]
    assert ik_class(sw.before.arm_configs[1]) == 1 and ik_class(sw.after.arm_configs[1]) == -1


def test_action_grasp_and_equilibrium(elbow_flip, action):
    T = action.place
    for s in action.switches:
        arm = elbow_flip.world.arms[s.arm]
        target = compose(T, elbow_flip.grasps[s.arm])
        assert pose_distance(forward_kinematics(arm, s.joint_path()[-1]), target) < 1e-8
        assert pose_distance(forward_kinematics(arm, s.joint_path()[0]), target) < 1e-8
        others = [i for i in range(len(elbow_flip.world.arms)) if i != s.arm]
        assert placement_equilibrium(T, elbow_flip.world, elbow_flip.grasps, others)
    for c in action.go + action.back:
        assert max(grasp_residual(c, elbow_flip.grasps, elbow_flip.world)) < 1e-8
        assert collision_free(c, elbow_flip.world, allow_contact=True)


def test_swing_clears_object(elbow_flip, action):
    s = action.switches[0]
    for q in s.swing:
        c = s.before.with_arm(1, q)
        assert collision_free(c, elbow_flip.world, allow_contact=True, grasping=[True, False])
        assert elbow_flip.world.arms[1].within_limits(q)
    path = s.joint_path()
    for a, b in zip(path, path[1:]):
        assert max(abs(x - y) for x, y in zip(a, b)) <= 0.2 + 1e-12


def test_regrasp_path_identity(elbow_flip, switch_pair, rng):
    pre, _ = switch_pair
    sw = plan_regrasp_path(1, pre, pre.arm_configs[1], elbow_flip.grasps, elbow_flip.world, rng,
                           elbow_flip.planner_params())
    assert sw.before == sw.after == pre
    assert sw.joint_path() == [pre.arm_configs[1]]


def test_action_reversal(action):
    r = action.reversed()
    assert r.go == list(reversed(action.back)) and r.back == list(reversed(action.go))
    assert r.switches[0].joint_path() == list(reversed(action.switches[0].joint_path()))
    assert r.reversed().go == action.go


def test_birrt_free_space(rng):
    path = birrt((0.0, 0.0), (1.0, -1.0), lambda q: True, (-2, -2), (2, 2), rng)
    assert path[0] == (0.0, 0.0) and path[-1] == (1.0, -1.0)
    assert all(max(abs(x - y) for x, y in zip(a, b)) <= 0.02 + 1e-12 for a, b in zip(path, path[1:]))


def test_birrt_around_wall(rng):
    def valid(q):
        return not (abs(q[0]) < 0.1 and q[1] < 0.8)
    path = birrt((-0.5, 0.0), (0.5, 0.0), valid, (-1, -1), (1, 1), rng)
    assert path is not None and all(valid(q) for q in path)
    assert birrt((-0.5, 0.0), (0.5, 0.0), lambda q: abs(q[0]) > 0.1, (-1, -1), (1, 1), rng,
                 iters=200) is None
    assert birrt((0.3, 0.3), (0.3, 0.3), valid, (-1, -1), (1, 1), rng) == [(0.3, 0.3)]


def test_no_floor_fails_at_connection(elbow_flip, switch_pair, rng):
    world = testbed.testbed_world(floor=None)
    pre, post = switch_pair
    ids = itertools.count()
    ta = Tree(pre, ids, True)
    tb = Tree(post, ids, False)
    conn = Connection(ta.root, tb.root, [post, pre], 0, True)
    ok, host = plan_ik_switch(ta, tb, conn, testbed.GRASPS, world, rng, elbow_flip.planner_params())
    assert not ok and host is conn and not conn.has_regrasp


def test_plan_ik_switch_stores_action(elbow_flip, switch_pair, rng):
    pre, post = switch_pair
    ids = itertools.count()
    ta = Tree(pre, ids, True)
    tb = Tree(post, ids, False)
    conn = Connection(ta.root, tb.root, [post, pre], 0, True)
    ok, host = plan_ik_switch(ta, tb, conn, elbow_flip.grasps, elbow_flip.world, rng, elbow_flip.planner_params())
    assert ok and host is None and conn.has_regrasp
    stored = conn.regrasp_action
    # already planned: a second pass leaves the stored action alone
    assert plan_ik_switch(ta, tb, conn, elbow_flip.grasps, elbow_flip.world, rng,
                          elbow_flip.planner_params()) == (True, None)
    assert conn.regrasp_action is stored

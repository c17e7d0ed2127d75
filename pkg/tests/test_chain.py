from hypothesis import given, settings, strategies as st

from chainplan.chain import NEED_REGRASP, REACHED, TRAPPED, compute_path, get_regrasp_config
from chainplan.geometry import PlanarPose, compose, interpolate_pose_path, pose_distance
from chainplan.kinematics import enumerate_ik, ik_class, is_near_boundary
from chainplan.world import COLLISION, collision_free, grasp_residual


def run(sc, T, **kw):
    path = interpolate_pose_path(sc.start.object_pose, T)
    return compute_path(sc.start, path, sc.grasps, sc.world, sc.planner_params(**kw))


def test_zero_length_path(elbow_flip):
    r = run(elbow_flip, elbow_flip.start.object_pose)
    assert r.status == REACHED and r.waypoints == [elbow_flip.start]


def test_short_reachable_path(elbow_flip):
    T = PlanarPose(-0.12, 0.16, 0.1)
    r = run(elbow_flip, T)
    assert r.status == REACHED
    assert r.waypoints[-1].object_pose == T


def test_fold_to_goal_needs_regrasp(elbow_flip):
    r = run(elbow_flip, elbow_flip.goal)
    assert r.status == NEED_REGRASP and r.arm == 1
    last = r.waypoints[-1]
    _, near = is_near_boundary(elbow_flip.world.arms[1], last.arm_configs[1], 0.05)
    assert near
    assert r.c_regrasp.object_pose == last.object_pose
    assert r.c_regrasp.arm_configs[0] == last.arm_configs[0]
    assert ik_class(r.c_regrasp.arm_configs[1]) == -ik_class(last.arm_configs[1])
    # the switched configuration is one of the enumerated solutions
    sols = enumerate_ik(elbow_flip.world.arms[1], compose(last.object_pose, elbow_flip.grasps[1]))
    assert any(max(abs(a - b) for a, b in zip(q, r.c_regrasp.arm_configs[1])) < 1e-12 for q in sols)
    assert max(grasp_residual(r.c_regrasp, elbow_flip.grasps, elbow_flip.world)) < 1e-9


def test_path_into_floor_trapped(elbow_flip):
    r = run(elbow_flip, PlanarPose(-0.1, 0.0, 0.0))
    assert r.status == TRAPPED and r.kind == COLLISION and r.arm is None
    # bisection puts the last waypoint close to contact (bar half height 0.05)
    assert r.waypoints[-1].object_pose.y - 0.05 < 0.05 / 2 ** 5


def test_unreachable_trapped(elbow_flip):
    r = run(elbow_flip, PlanarPose(-1.5, 0.12, 0.0))
    assert r.status == TRAPPED and r.arm is not None


def test_get_regrasp_config_classes(elbow_flip):
    # no other class exists for the left arm: its elbow range excludes negative angles
    assert get_regrasp_config(elbow_flip.start, 0, elbow_flip.grasps, elbow_flip.world) is None
    c = get_regrasp_config(elbow_flip.start, 1, elbow_flip.grasps, elbow_flip.world)
    assert c is not None and ik_class(c.arm_configs[1]) == -1


@settings(max_examples=25)
@given(st.floats(-0.25, 0.25), st.floats(0.06, 0.3), st.floats(-0.4, 0.4))
def test_waypoints_are_valid(elbow_flip, x, y, th):
    params = elbow_flip.planner_params()
    r = run(elbow_flip, PlanarPose(x, y, th))
    assert r.waypoints[0] == elbow_flip.start
    for a, b in zip(r.waypoints, r.waypoints[1:]):
        assert pose_distance(a.object_pose, b.object_pose, params.w_rot) <= params.step * (1 + 1e-9)
        assert max(abs(u - v) for qa, qb in zip(a.arm_configs, b.arm_configs)
                   for u, v in zip(qa, qb)) <= params.ik.max_step + 1e-12
    for c in r.waypoints:
        assert max(grasp_residual(c, elbow_flip.grasps, elbow_flip.world)) < 1e-8
        assert collision_free(c, elbow_flip.world)
    if r.status == NEED_REGRASP:
        assert collision_free(r.c_regrasp, elbow_flip.world)

import pytest
from hypothesis import given, strategies as st

from chainplan.geometry import PlanarPose, compose, pose_distance
from chainplan.kinematics import ArmModel, forward_kinematics
from chainplan import testbed
from chainplan.world import (COLLISION, ChainBreak, CompositeConfig, Segment, WorldDescription,
                             closing_configs, collision_free, collision_report,
                             compute_composite_config, grasp_residual, is_chain_closed)


def test_start_is_closed(elbow_flip):
    assert max(grasp_residual(elbow_flip.start, elbow_flip.grasps, elbow_flip.world)) < 1e-10
    assert is_chain_closed(elbow_flip.start, elbow_flip.grasps, elbow_flip.world)
    assert collision_free(elbow_flip.start, elbow_flip.world)


def test_residual_matches_fk(elbow_flip):
    c = elbow_flip.start.with_arm(0, [v + 0.01 for v in elbow_flip.start.arm_configs[0]])
    res = grasp_residual(c, elbow_flip.grasps, elbow_flip.world)
    want = pose_distance(forward_kinematics(elbow_flip.world.arms[0], c.arm_configs[0]),
                         compose(c.object_pose, elbow_flip.grasps[0]))
    assert res[0] == want and res[0] > 1e-3
    assert res[1] < 1e-10


def test_residual_arm_count_mismatch(elbow_flip):
    with pytest.raises(ValueError):
        grasp_residual(elbow_flip.start, elbow_flip.grasps[:1], elbow_flip.world)


@given(st.floats(-0.15, 0.15), st.floats(0.08, 0.3), st.floats(-0.5, 0.5))
def test_closing_configs_close_the_chain(x, y, th):
    world = testbed.testbed_world()
    T = PlanarPose(x, y, th)
    per_arm = closing_configs(T, testbed.GRASPS, world)
    for arm, g, sols in zip(world.arms, testbed.GRASPS, per_arm):
        for q in sols:
            assert arm.within_limits(q)
            assert pose_distance(forward_kinematics(arm, q), compose(T, g)) < 1e-9


def test_follow_small_motion(elbow_flip):
    T = PlanarPose(-0.09, 0.125, 0.02)
    c = compute_composite_config(elbow_flip.start, T, elbow_flip.grasps, elbow_flip.world)
    assert c.object_pose == T
    assert max(grasp_residual(c, elbow_flip.grasps, elbow_flip.world)) < 1e-9


def test_follow_into_floor_is_collision(elbow_flip):
    c = elbow_flip.start
    for y in (0.1, 0.08, 0.06):
        c = compute_composite_config(c, PlanarPose(-0.1, y, 0.0), elbow_flip.grasps, elbow_flip.world)
    with pytest.raises(ChainBreak) as e:
        compute_composite_config(c, PlanarPose(-0.1, 0.045, 0.0), elbow_flip.grasps, elbow_flip.world)
    assert e.value.kind == COLLISION and e.value.index is None


def test_chain_break_names_lowest_arm(elbow_flip):
    T = PlanarPose(3.0, 3.0, 0.0)  # out of reach for both arms
    with pytest.raises(ChainBreak) as e:
        compute_composite_config(elbow_flip.start, T, elbow_flip.grasps, elbow_flip.world)
    assert e.value.index == 0


def test_chain_break_second_arm(elbow_flip):
    w = elbow_flip.world
    stub = ArmModel(w.arms[1].base, (0.01, 0.01, 0.01), w.arms[1].q_lower, w.arms[1].q_upper)
    world = WorldDescription((w.arms[0], stub), w.object_vertices, w.mass, supports=w.supports)
    T = PlanarPose(-0.095, 0.12, 0.0)
    with pytest.raises(ChainBreak) as e:
        compute_composite_config(elbow_flip.start, T, elbow_flip.grasps, world)
    assert e.value.index == 1


def test_collision_report_cases(elbow_flip):
    w = elbow_flip.world
    assert collision_report(elbow_flip.start, w) is None
    on_floor = CompositeConfig(elbow_flip.start.arm_configs, PlanarPose(-0.1, 0.05, 0.0))
    assert collision_report(on_floor, w) == "object touches support"
    assert collision_report(on_floor, w, allow_contact=True) is None
    sunk = CompositeConfig(elbow_flip.start.arm_configs, PlanarPose(-0.1, 0.049, 0.0))
    assert collision_report(sunk, w, allow_contact=True) == "object penetrates support"


def test_grasp_exclusion(elbow_flip):
    # the wrist link sits on the object while grasping; released arms must clear it
    c = elbow_flip.start
    assert collision_report(c, elbow_flip.world, grasping=[True, True]) is None
    assert "hits object" in collision_report(c, elbow_flip.world, grasping=[False, True])


def test_obstacle_blocks_object(elbow_flip):
    w = elbow_flip.world
    world = WorldDescription(w.arms, w.object_vertices, w.mass, supports=w.supports,
                             obstacles=(Segment((-0.1, 0.0), (-0.1, 0.14)),))
    assert collision_report(elbow_flip.start, world) == "object hits obstacle"


def test_world_validation(elbow_flip):
    w = elbow_flip.world
    with pytest.raises(ValueError):
        WorldDescription(w.arms, tuple(reversed(w.object_vertices)), 1.0)
    with pytest.raises(ValueError):
        WorldDescription(w.arms, w.object_vertices, 0.0)
    with pytest.raises(ValueError):
        WorldDescription(w.arms, w.object_vertices, 1.0, friction_mu=-1)


def test_segment_normal_is_left():
    s = Segment((0.0, 0.0), (2.0, 0.0))
    assert s.normal == pytest.approx((0.0, 1.0))
    assert s.tangent == pytest.approx((1.0, 0.0))


def test_json_round_trip(elbow_flip):
    w = elbow_flip.world
    assert WorldDescription.from_json(w.to_json()) == w
    c = elbow_flip.start
    assert CompositeConfig.from_json(c.to_json()) == c


def test_with_arm_is_copy(elbow_flip):
    c = elbow_flip.start
    d = c.with_arm(1, (0.0, 0.0, 0.0))
    assert d.arm_configs[1] == (0.0, 0.0, 0.0)
    assert c.arm_configs[1] != d.arm_configs[1]
    assert d.arm_configs[0] == c.arm_configs[0]

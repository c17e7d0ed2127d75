"""Desk-scale planar dual-arm testbed: the bundled scenarios and a scenario fuzzer.

Two planar 3R arms face each other over a floor and hold a rectangular bar
at its two short ends. In the reference scenario the right arm's elbow range
is cut short, so at the goal pose only its negative-elbow branch reaches the
grasp while the start uses the positive branch. The left arm has a single
elbow branch.
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import PlanarPose, compose
from .kinematics import ArmModel, enumerate_ik, ik_class
from .scenario import Scenario
from .world import CompositeConfig, Segment, WorldDescription, collision_free

LINKS = (0.4, 0.35, 0.12)
BAR_HALF = (0.15, 0.05)
GRASPS = (PlanarPose(-BAR_HALF[0], 0.0, 0.0), PlanarPose(BAR_HALF[0], 0.0, math.pi))


def bar_vertices(half=BAR_HALF):
    hx, hy = half
    return ((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy))


def testbed_arms(elbow_max_right: float = 1.5):
    left = ArmModel(PlanarPose(-0.65, 0.5, 0.0), LINKS, (-math.pi, 0.05, -math.pi),
                    (math.pi, 2.9, math.pi), name="left")
    right = ArmModel(PlanarPose(0.65, 0.5, math.pi), LINKS, (-math.pi, -2.9, -math.pi),
                     (math.pi, elbow_max_right, math.pi), name="right")
    return left, right


def testbed_world(floor=((-1.0, 0.0), (1.0, 0.0)), **kw) -> WorldDescription:
    supports = () if floor is None else (Segment(*floor),)
    return WorldDescription(arms=testbed_arms(**kw), object_vertices=bar_vertices(), mass=1.0,
                            supports=supports)


def closing_composite(world: WorldDescription, G, T: PlanarPose, classes) -> CompositeConfig | None:
    """The collision-free composite at ``T`` with the given elbow class per arm, if any."""
    qs = []
    for arm, g, cls in zip(world.arms, G, classes):
        sols = [q for q in enumerate_ik(arm, compose(T, g)) if ik_class(q) == cls]
        if not sols:
            return None
        qs.append(sols[0])
    c = CompositeConfig(tuple(qs), T)
    return c if collision_free(c, world) else None


ELBOW_FLIP_START = PlanarPose(-0.1, 0.12, 0.0)
ELBOW_FLIP_GOAL = PlanarPose(0.1, 0.12, 0.0)
ELBOW_FLIP_BOUNDS = [[-0.25, 0.06, -0.4], [0.25, 0.3, 0.4]]


def elbow_flip_scenario() -> Scenario:
    world = testbed_world()
    start = closing_composite(world, GRASPS, ELBOW_FLIP_START, (1, 1))
    return Scenario(world, GRASPS, start, ELBOW_FLIP_GOAL, {"bounds": ELBOW_FLIP_BOUNDS}, name="elbow_flip")


def failure_scenario() -> Scenario:
    """Same task, but the floor is missing under the start region.

    Switches requested there find no placement, which exercises the
    reorganization path before a switch further right succeeds.
    """
    world = testbed_world(floor=((-0.02, 0.0), (1.0, 0.0)))
    start = closing_composite(world, GRASPS, ELBOW_FLIP_START, (1, 1))
    return Scenario(world, GRASPS, start, ELBOW_FLIP_GOAL, {"bounds": ELBOW_FLIP_BOUNDS},
                    name="floor_gap")


def fuzz_scenario(seed: int, max_tries: int = 200) -> Scenario:
    """Random start/goal poses on the testbed with random arm limits and regrasp budget."""
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        world = testbed_world(elbow_max_right=float(rng.uniform(1.2, 2.9)))
        T0 = PlanarPose(rng.uniform(-0.2, 0.2), rng.uniform(0.08, 0.25), rng.uniform(-0.3, 0.3))
        T1 = PlanarPose(rng.uniform(-0.2, 0.2), rng.uniform(0.08, 0.25), rng.uniform(-0.3, 0.3))
        cls = (1, int(rng.choice([-1, 1])))
        start = closing_composite(world, GRASPS, T0, cls)
        if start is None:
            continue
        params = {"bounds": ELBOW_FLIP_BOUNDS, "R_max": int(rng.integers(0, 4)), "N_max": 300,
                  "seed": int(seed)}
        return Scenario(world, GRASPS, start, T1, params, name=f"fuzz-{seed}")
    raise RuntimeError("could not draw a valid fuzz scenario")

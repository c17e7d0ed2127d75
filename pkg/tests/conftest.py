import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chainplan.geometry import PlanarPose
from chainplan.global_planner import plan
from chainplan.kinematics import ArmModel
from chainplan.testbed import failure_scenario, elbow_flip_scenario

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def arm3():
    return ArmModel(PlanarPose(0.1, -0.2, 0.3), (0.4, 0.3, 0.1), (-math.pi,) * 3, (math.pi,) * 3)


@pytest.fixture(scope="session")
def elbow_flip():
    return elbow_flip_scenario()


@pytest.fixture(scope="session")
def floor_gap():
    return failure_scenario()


@pytest.fixture(scope="session")
def elbow_flip_plan(elbow_flip):
    return plan(elbow_flip.start, elbow_flip.goal, elbow_flip.planner_params(R_max=1, seed=3),
                elbow_flip.grasps, elbow_flip.world)


@pytest.fixture(scope="session")
def floor_gap_plan(floor_gap):
    stats = {}
    p = plan(floor_gap.start, floor_gap.goal, floor_gap.planner_params(R_max=1, seed=1),
             floor_gap.grasps, floor_gap.world, stats)
    return p, stats

"""Closed-chain dual-arm manipulation planning with IK-switch regrasps."""
from importlib import resources

from .execsim import ControlGains, simulate_execution
from .geometry import PlanarPose, SpatialPose, pose_distance
from .global_planner import PlanningFailure, plan
from .kinematics import ArmModel, enumerate_ik, forward_kinematics, jacobian
from .params import PlannerParams
from .plan import CompositePlan
from .scenario import Scenario, load_scenario
from .validate import check_plan
from .world import CompositeConfig, Segment, WorldDescription

__version__ = "0.1.0"

BUNDLED = ("elbow_flip", "floor_gap")


def bundled_scenario_path(name: str):
    """Filesystem path of a scenario shipped with the package."""
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled scenario {name!r}; have {BUNDLED}")
    return resources.files(__name__) / "scenarios" / f"{name}.json"


__all__ = [
    "ArmModel", "CompositeConfig", "CompositePlan", "ControlGains", "PlanarPose", "PlannerParams",
    "PlanningFailure", "Scenario", "Segment", "SpatialPose", "WorldDescription", "bundled_scenario_path",
    "check_plan", "enumerate_ik", "forward_kinematics", "jacobian", "load_scenario", "plan",
    "pose_distance", "simulate_execution",
]

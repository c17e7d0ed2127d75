"""Composite configurations, the grasp constraint, and collision checking."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .collision import (point_in_convex_polygon, polygon_is_convex_ccw, segment_distance,
                        segment_polygon_distance, segments_intersect)
from .geometry import DEFAULT_W_ROT, PlanarPose, compose, pose_distance, pose_from_json, pose_to_json
from .kinematics import (ArmModel, DiffIKParams, IKFailure, differential_ik_step,
                         enumerate_ik, forward_kinematics, joint_points)

COLLISION = "COLLISION"

GraspSet = tuple  # tuple[PlanarPose, ...], one object->end-effector transform per arm


@dataclass(frozen=True)
class CompositeConfig:
    arm_configs: tuple
    object_pose: PlanarPose

    def __post_init__(self):
        object.__setattr__(self, "arm_configs",
                           tuple(tuple(float(v) for v in q) for q in self.arm_configs))

    def with_arm(self, index: int, q: Sequence[float]) -> "CompositeConfig":
        qs = list(self.arm_configs)
        qs[index] = tuple(q)
        return CompositeConfig(tuple(qs), self.object_pose)

    def to_json(self) -> dict:
        return {"arms": [list(q) for q in self.arm_configs], "object": pose_to_json(self.object_pose)}

    @classmethod
    def from_json(cls, d: dict) -> "CompositeConfig":
        return cls(tuple(tuple(q) for q in d["arms"]), pose_from_json(d["object"]))


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple

    @property
    def normal(self) -> tuple[float, float]:
        """Unit normal on the free (left) side of a -> b."""
        dx, dy = self.b[0] - self.a[0], self.b[1] - self.a[1]
        n = math.hypot(dx, dy)
        return (-dy / n, dx / n)

    @property
    def tangent(self) -> tuple[float, float]:
        dx, dy = self.b[0] - self.a[0], self.b[1] - self.a[1]
        n = math.hypot(dx, dy)
        return (dx / n, dy / n)

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b)}

    @classmethod
    def from_json(cls, d: dict) -> "Segment":
        return cls(tuple(float(v) for v in d["a"]), tuple(float(v) for v in d["b"]))


@dataclass(frozen=True)
class WorldDescription:
    arms: tuple
    object_vertices: tuple  # object frame, counterclockwise
    mass: float
    com: tuple = (0.0, 0.0)
    supports: tuple = ()   # support surfaces, free side on the left of a -> b
    obstacles: tuple = ()
    friction_mu: float = 0.5
    grip_force_max: float = 50.0
    gravity: tuple = (0.0, -9.81)
    link_radius: float = 0.01
    grasp_exclusions: tuple | None = None  # per arm: link indices exempt from object checks while grasping
    contact_tol: float = 1e-7

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        object.__setattr__(self, "object_vertices",
                           tuple(tuple(float(c) for c in v) for v in self.object_vertices))
        object.__setattr__(self, "com", tuple(float(c) for c in self.com))
        object.__setattr__(self, "supports", tuple(self.supports))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "gravity", tuple(float(c) for c in self.gravity))
        if self.grasp_exclusions is None:
            excl = tuple((a.dof - 1,) for a in self.arms)
        else:
            excl = tuple(tuple(int(i) for i in e) for e in self.grasp_exclusions)
        object.__setattr__(self, "grasp_exclusions", excl)
        if not polygon_is_convex_ccw(self.object_vertices):
            raise ValueError("object polygon must be convex, counterclockwise, with >= 3 vertices")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.friction_mu < 0:
            raise ValueError("friction_mu must be nonnegative")
        if len(self.grasp_exclusions) != len(self.arms):
            raise ValueError("grasp_exclusions needs one entry per arm")

    def object_polygon(self, T: PlanarPose) -> list[tuple[float, float]]:
        return [T.apply(v) for v in self.object_vertices]

    def to_json(self) -> dict:
        return {
            "arms": [a.to_json() for a in self.arms],
            "object": {"vertices": [list(v) for v in self.object_vertices],
                       "mass": self.mass, "com": list(self.com)},
            "supports": [s.to_json() for s in self.supports],
            "obstacles": [s.to_json() for s in self.obstacles],
            "friction_mu": self.friction_mu,
            "grip_force_max": self.grip_force_max,
            "gravity": list(self.gravity),
            "link_radius": self.link_radius,
            "grasp_exclusions": [list(e) for e in self.grasp_exclusions],
        }

    @classmethod
    def from_json(cls, d: dict) -> "WorldDescription":
        obj = d["object"]
        return cls(
            arms=tuple(ArmModel.from_json(a) for a in d["arms"]),
            object_vertices=tuple(tuple(v) for v in obj["vertices"]),
            mass=float(obj["mass"]),
            com=tuple(obj.get("com", (0.0, 0.0))),
            supports=tuple(Segment.from_json(s) for s in d.get("supports", [])),
            obstacles=tuple(Segment.from_json(s) for s in d.get("obstacles", [])),
            friction_mu=float(d.get("friction_mu", 0.5)),
            grip_force_max=float(d.get("grip_force_max", 50.0)),
            gravity=tuple(d.get("gravity", (0.0, -9.81))),
            link_radius=float(d.get("link_radius", 0.01)),
            grasp_exclusions=d.get("grasp_exclusions"),
        )


class ChainBreak(Exception):
    """Chain following failed at one arm (``index``) or by collision (``index`` None)."""

    def __init__(self, kind: str, index: int | None = None):
        super().__init__(f"{kind} at arm {index}")
        self.kind = kind
        self.index = index


def project(c: CompositeConfig) -> PlanarPose:
    return c.object_pose


def grasp_targets(T_obj: PlanarPose, G: GraspSet) -> list[PlanarPose]:
    return [compose(T_obj, g) for g in G]


def grasp_residual(c: CompositeConfig, G: GraspSet, world: WorldDescription,
                   w_rot: float = DEFAULT_W_ROT) -> list[float]:
    if len(c.arm_configs) != len(world.arms) or len(G) != len(world.arms):
        raise ValueError("composite config, grasp set and world disagree on the arm count")
    return [pose_distance(forward_kinematics(arm, q), compose(c.object_pose, g), w_rot)
            for arm, q, g in zip(world.arms, c.arm_configs, G)]


def is_chain_closed(c: CompositeConfig, G: GraspSet, world: WorldDescription, tol: float = 1e-8) -> bool:
    return max(grasp_residual(c, G, world)) <= tol


def _link_segments(arm: ArmModel, q):
    pts = joint_points(arm, q)
    return [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]


def collision_report(c: CompositeConfig, world: WorldDescription, allow_contact: bool = False,
                     grasping: Sequence[bool] | None = None) -> str | None:
    """Describe the first collision found, or None when the configuration is free.

    ``grasping[i]`` marks arms holding the object; their excluded links are not
    tested against the object. With ``allow_contact`` the object may rest on
    support surfaces (penetration up to ``world.contact_tol``).
    """
    r = world.link_radius
    k = len(world.arms)
    if grasping is None:
        grasping = [True] * k
    poly = world.object_polygon(c.object_pose)
    segs = [_link_segments(arm, q) for arm, q in zip(world.arms, c.arm_configs)]
    solid = list(world.supports) + list(world.obstacles)

    for i, links in enumerate(segs):
        excl = world.grasp_exclusions[i] if grasping[i] else ()
        for j, (a, b) in enumerate(links):
            for s in solid:
                if segment_distance(a, b, s.a, s.b) < r:
                    return f"arm {i} link {j} hits environment"
            if j not in excl and segment_polygon_distance(a, b, poly) < r:
                return f"arm {i} link {j} hits object"
        for j in range(len(links)):
            for m in range(j + 2, len(links)):
                if segment_distance(*links[j], *links[m]) < 2 * r:
                    return f"arm {i} self-collision ({j}, {m})"
    for i in range(k):
        for m in range(i + 1, k):
            for a, b in segs[i]:
                for cc, d in segs[m]:
                    if segment_distance(a, b, cc, d) < 2 * r:
                        return f"arms {i} and {m} collide"

    for s in world.obstacles:
        if _segment_hits_polygon(s.a, s.b, poly):
            return "object hits obstacle"
    for s in world.supports:
        if allow_contact:
            nx, ny = s.normal
            tol = world.contact_tol
            lifted = [(x + nx * tol, y + ny * tol) for x, y in poly]
            if _segment_hits_polygon(s.a, s.b, lifted):
                return "object penetrates support"
        elif _segment_hits_polygon(s.a, s.b, poly):
            return "object touches support"
    return None


def _segment_hits_polygon(a, b, poly) -> bool:
    if point_in_convex_polygon(a, poly) or point_in_convex_polygon(b, poly):
        return True
    n = len(poly)
    return any(segments_intersect(a, b, poly[i], poly[(i + 1) % n]) for i in range(n))


def collision_free(c: CompositeConfig, world: WorldDescription, allow_contact: bool = False,
                   grasping: Sequence[bool] | None = None) -> bool:
    return collision_report(c, world, allow_contact, grasping) is None


def compute_composite_config(c_prev: CompositeConfig, T_obj: PlanarPose, G: GraspSet,
                             world: WorldDescription, ik: DiffIKParams = DiffIKParams(),
                             allow_contact: bool = False) -> CompositeConfig:
    """Follow the object to ``T_obj`` with every arm by differential IK.

    Raises ChainBreak naming the lowest-index arm whose IK failed, or with
    kind COLLISION when the chain closes but collides.
    """
    qs = []
    for i, (arm, q, g) in enumerate(zip(world.arms, c_prev.arm_configs, G)):
        target = compose(T_obj, g)
        try:
            qs.append(differential_ik_step(arm, q, target, ik))
        except IKFailure as exc:
            raise ChainBreak(exc.kind, i) from None
    c = CompositeConfig(tuple(qs), T_obj)
    if not collision_free(c, world, allow_contact):
        raise ChainBreak(COLLISION, None)
    return c


def closing_configs(T_obj: PlanarPose, G: GraspSet, world: WorldDescription) -> list[list]:
    """Per arm, every IK solution placing the end-effector on its grasp."""
    return [enumerate_ik(arm, compose(T_obj, g)) for arm, g in zip(world.arms, G)]

"""Planar serial arms: forward kinematics, Jacobians, IK enumeration and following."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import PlanarPose, compose, invert, wrap_angle

JointConfig = tuple  # tuple[float, ...], length == arm dof

LIMIT = "LIMIT"
DIVERGED = "DIVERGED"
JUMP = "JUMP"


class IKFailure(Exception):
    def __init__(self, kind: str, q: JointConfig | None = None):
        super().__init__(kind)
        self.kind = kind
        self.q = q


@dataclass(frozen=True)
class DiffIKParams:
    damping: float = 1e-4
    max_iters: int = 100
    tol: float = 1e-10
    max_step: float = 0.2  # rad, infinity norm per call


@dataclass(frozen=True)
class ArmModel:
    base: PlanarPose
    link_lengths: tuple
    q_lower: tuple
    q_upper: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for attr in ("link_lengths", "q_lower", "q_upper"):
            object.__setattr__(self, attr, tuple(float(v) for v in getattr(self, attr)))
        n = len(self.link_lengths)
        if n == 0 or len(self.q_lower) != n or len(self.q_upper) != n:
            raise ValueError("link_lengths, q_lower and q_upper must have equal nonzero length")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        if any(lo >= hi for lo, hi in zip(self.q_lower, self.q_upper)):
            raise ValueError("q_lower must be below q_upper for every joint")

    @property
    def dof(self) -> int:
        return len(self.link_lengths)

    def within_limits(self, q: Sequence[float], tol: float = 1e-9) -> bool:
        return all(lo - tol <= v <= hi + tol for v, lo, hi in zip(q, self.q_lower, self.q_upper))

    def to_json(self) -> dict:
        from .geometry import pose_to_json
        return {"base": pose_to_json(self.base), "links": list(self.link_lengths),
                "q_lower": list(self.q_lower), "q_upper": list(self.q_upper)}

    @classmethod
    def from_json(cls, d: dict) -> "ArmModel":
        from .geometry import pose_from_json
        return cls(pose_from_json(d["base"]), d["links"], d["q_lower"], d["q_upper"],
                   name=d.get("name", ""))


def _check_len(arm: ArmModel, q) -> None:
    if len(q) != arm.dof:
        raise ValueError(f"expected {arm.dof} joint values, got {len(q)}")


def joint_points(arm: ArmModel, q: Sequence[float]) -> list[tuple[float, float]]:
    """World positions of the base, every joint, and the end-effector (dof + 1 points)."""
    _check_len(arm, q)
    x, y, phi = arm.base.x, arm.base.y, arm.base.theta
    pts = [(x, y)]
    for l, qj in zip(arm.link_lengths, q):
        phi += qj
        x += l * math.cos(phi)
        y += l * math.sin(phi)
        pts.append((x, y))
    return pts


def forward_kinematics(arm: ArmModel, q: Sequence[float]) -> PlanarPose:
    _check_len(arm, q)
    x, y, phi = arm.base.x, arm.base.y, arm.base.theta
    for l, qj in zip(arm.link_lengths, q):
        phi += qj
        x += l * math.cos(phi)
        y += l * math.sin(phi)
    return PlanarPose(x, y, phi)


def _fk_raw(arm: ArmModel, q):
    x, y, phi = arm.base.x, arm.base.y, arm.base.theta
    xs, ys = [x], [y]
    for l, qj in zip(arm.link_lengths, q):
        phi += qj
        x += l * math.cos(phi)
        y += l * math.sin(phi)
        xs.append(x)
        ys.append(y)
    return xs, ys, phi


def jacobian(arm: ArmModel, q: Sequence[float]) -> np.ndarray:
    """3 x dof Jacobian of (x, y, theta) of the end-effector."""
    _check_len(arm, q)
    xs, ys, _ = _fk_raw(arm, q)
    xe, ye = xs[-1], ys[-1]
    J = np.empty((3, arm.dof))
    for j in range(arm.dof):
        J[0, j] = -(ye - ys[j])
        J[1, j] = xe - xs[j]
        J[2, j] = 1.0
    return J


def ik_class(q: Sequence[float]) -> int:
    """Elbow class label: +1 for a positive elbow angle, -1 for negative, 0 when straight."""
    if len(q) < 2:
        return 0
    e = q[1]
    return (e > 0.0) - (e < 0.0)


def _representatives(v: float, lo: float, hi: float) -> list[float]:
    base = wrap_angle(v)
    out = []
    k = math.ceil((lo - base) / (2 * math.pi))
    while base + 2 * math.pi * k <= hi + 1e-12:
        out.append(min(max(base + 2 * math.pi * k, lo), hi))
        k += 1
    return out


def enumerate_ik(arm: ArmModel, target: PlanarPose, singular_tol: float = 1e-10) -> list[JointConfig]:
    """Every joint-limit-respecting solution reaching ``target`` exactly.

    Supports planar 2R (position only) and 3R (position and orientation)
    arms. Solutions come elbow-down (positive elbow) first.
    """
    if arm.dof not in (2, 3):
        raise NotImplementedError("analytic IK is available for planar 2R and 3R arms")
    local = compose(invert(arm.base), target)
    l1, l2 = arm.link_lengths[0], arm.link_lengths[1]
    if arm.dof == 3:
        l3 = arm.link_lengths[2]
        wx = local.x - l3 * math.cos(local.theta)
        wy = local.y - l3 * math.sin(local.theta)
    else:
        wx, wy = local.x, local.y
    c2 = (wx * wx + wy * wy - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if c2 > 1.0 + singular_tol or c2 < -1.0 - singular_tol:
        return []
    if c2 >= 1.0 - singular_tol:
        elbows = [0.0]
    elif c2 <= -1.0 + singular_tol:
        elbows = [math.pi]
    else:
        e = math.acos(c2)
        elbows = [e, -e]
    out: list[JointConfig] = []
    for q2 in elbows:
        q1 = math.atan2(wy, wx) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
        raw = [q1, q2] if arm.dof == 2 else [q1, q2, local.theta - q1 - q2]
        choices = [_representatives(v, lo, hi) for v, lo, hi in zip(raw, arm.q_lower, arm.q_upper)]
        if any(not c for c in choices):
            continue
        for sol in _product(choices):
            if not any(max(abs(a - b) for a, b in zip(sol, s)) < 1e-9 for s in out):
                out.append(tuple(sol))
    return out


def _product(choices):
    if not choices:
        yield ()
        return
    for head in choices[0]:
        for tail in _product(choices[1:]):
            yield (head,) + tail


def task_error(arm: ArmModel, q, target: PlanarPose) -> np.ndarray:
    xs, ys, phi = _fk_raw(arm, q)
    return np.array([target.x - xs[-1], target.y - ys[-1], wrap_angle(target.theta - phi)])


def differential_ik_step(arm: ArmModel, q_prev: Sequence[float], target: PlanarPose,
                         params: DiffIKParams = DiffIKParams()) -> JointConfig:
    """Damped least-squares IK from ``q_prev`` to ``target``.

    Raises IKFailure with kind DIVERGED (no convergence), LIMIT (converged
    outside the joint limits) or JUMP (converged too far from ``q_prev`` or
    into a different elbow class).
    """
    _check_len(arm, q_prev)
    q = np.array(q_prev, dtype=float)
    lam2 = params.damping ** 2
    eye = np.eye(3)
    converged = False
    for _ in range(params.max_iters + 1):
        e = task_error(arm, q, target)
        if math.sqrt(float(e @ e)) <= params.tol:
            converged = True
            break
        J = jacobian(arm, q)
        q = q + J.T @ np.linalg.solve(J @ J.T + lam2 * eye, e)
    if not converged:
        raise IKFailure(DIVERGED)
    out = tuple(float(v) for v in q)
    if max(abs(a - b) for a, b in zip(out, q_prev)) > params.max_step:
        raise IKFailure(JUMP, out)
    if arm.dof >= 2 and ik_class(out) != ik_class(q_prev) and ik_class(q_prev) != 0:
        raise IKFailure(JUMP, out)
    if not arm.within_limits(out, tol=0.0):
        raise IKFailure(LIMIT, out)
    return out


def is_near_boundary(arm: ArmModel, q: Sequence[float], eps: float = 0.05) -> tuple[list[bool], bool]:
    if eps <= 0:
        raise ValueError("eps must be positive")
    flags = [v <= lo + eps or v >= hi - eps for v, lo, hi in zip(q, arm.q_lower, arm.q_upper)]
    return flags, any(flags)


def flexibility_score(arm: ArmModel, q: Sequence[float]) -> float:
    """(q_u - q)^T (q - q_l): large when every joint sits mid-range."""
    return sum((hi - v) * (v - lo) for v, lo, hi in zip(q, arm.q_lower, arm.q_upper))

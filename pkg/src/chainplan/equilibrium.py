"""Static equilibrium of a grasped, environment-supported planar object.

Contact forces must balance the gravito-inertial wrench; environment contacts
stay inside their (exact, two-edge) planar friction cone and grasp contacts
are bounded per axis by the grip force limit. Feasibility is decided with
the phase-I simplex in :mod:`chainplan.simplex`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import PlanarPose, compose, wrap_angle
from .kinematics import enumerate_ik
from .simplex import phase_one
from .world import GraspSet, WorldDescription, _segment_hits_polygon

ENV = "env"


@dataclass(frozen=True)
class WrenchGI:
    force: tuple
    moment: float


@dataclass
class ContactSet:
    """Contact points (world frame). ``kinds[i]`` is "env" or the grasping arm's index."""
    points: list = field(default_factory=list)
    kinds: list = field(default_factory=list)
    normals: list = field(default_factory=list)  # unit normal for env contacts, None for grasps

    def add_env(self, p, normal) -> None:
        n = math.hypot(*normal)
        self.points.append(tuple(p))
        self.kinds.append(ENV)
        self.normals.append((normal[0] / n, normal[1] / n))

    def add_grasp(self, p, arm: int) -> None:
        self.points.append(tuple(p))
        self.kinds.append(int(arm))
        self.normals.append(None)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_env(self) -> int:
        return sum(1 for k in self.kinds if k == ENV)


@dataclass
class EquilibriumResult:
    feasible: bool
    forces: list | None = None  # per contact (fx, fy)

    def __bool__(self) -> bool:
        return self.feasible


def gravito_inertial_wrench(mass: float, p_com, g=(0.0, -9.81)) -> WrenchGI:
    """Planar reduction of [-m g; -m (p_com x g)]."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    fx, fy = -mass * g[0], -mass * g[1]
    moment = -mass * (p_com[0] * g[1] - p_com[1] * g[0])
    return WrenchGI((fx, fy), moment)


def _cross(p, f) -> float:
    return p[0] * f[1] - p[1] * f[0]


def equilibrium_feasible(wrench: WrenchGI, contacts: ContactSet, mu: float,
                         f_grip_max: float, tol: float = 1e-9) -> EquilibriumResult:
    if len(contacts) == 0:
        raise ValueError("at least one contact is required")
    # per-contact force = sum_j coeff_j * basis_j + offset, coeffs >= 0
    cols = []       # (contact index, basis force vector)
    offsets = []    # (contact index, constant force)
    box_rows = []   # (column a, column b) with x_a + x_b = 2F
    for ci, (p, kind, n) in enumerate(zip(contacts.points, contacts.kinds, contacts.normals)):
        if kind == ENV:
            t = (-n[1], n[0])
            for sgn in (1.0, -1.0):
                cols.append((ci, (n[0] + sgn * mu * t[0], n[1] + sgn * mu * t[1])))
        else:
            F = f_grip_max
            for axis in ((1.0, 0.0), (0.0, 1.0)):
                a = len(cols)
                cols.append((ci, axis))
                cols.append((ci, (0.0, 0.0)))  # slack
                box_rows.append((a, a + 1))
                offsets.append((ci, (-F * axis[0], -F * axis[1])))
    nvar = len(cols)
    A = np.zeros((3 + len(box_rows), nvar))
    b = np.zeros(3 + len(box_rows))
    b[0], b[1], b[2] = wrench.force[0], wrench.force[1], wrench.moment
    for j, (ci, f) in enumerate(cols):
        p = contacts.points[ci]
        A[0, j], A[1, j], A[2, j] = f[0], f[1], _cross(p, f)
    for ci, f in offsets:
        p = contacts.points[ci]
        b[0] -= f[0]
        b[1] -= f[1]
        b[2] -= _cross(p, f)
    for r, (a, s) in enumerate(box_rows):
        A[3 + r, a] = 1.0
        A[3 + r, s] = 1.0
        b[3 + r] = 2.0 * f_grip_max
    ok, x = phase_one(A, b, tol=tol)
    if not ok:
        return EquilibriumResult(False)
    forces = [[0.0, 0.0] for _ in range(len(contacts))]
    for j, (ci, f) in enumerate(cols):
        forces[ci][0] += x[j] * f[0]
        forces[ci][1] += x[j] * f[1]
    for ci, f in offsets:
        forces[ci][0] += f[0]
        forces[ci][1] += f[1]
    return EquilibriumResult(True, [tuple(f) for f in forces])


def wrench_residual(wrench: WrenchGI, contacts: ContactSet, forces) -> float:
    fx = sum(f[0] for f in forces) - wrench.force[0]
    fy = sum(f[1] for f in forces) - wrench.force[1]
    mz = sum(_cross(p, f) for p, f in zip(contacts.points, forces)) - wrench.moment
    return max(abs(fx), abs(fy), abs(mz))


def constraint_violation(contacts: ContactSet, forces, mu: float, f_grip_max: float) -> float:
    """Largest violation of the friction-cone and grip-box inequalities (0 when satisfied)."""
    worst = 0.0
    for f, kind, n in zip(forces, contacts.kinds, contacts.normals):
        if kind == ENV:
            fn = f[0] * n[0] + f[1] * n[1]
            ft = -f[0] * n[1] + f[1] * n[0]
            worst = max(worst, -fn, abs(ft) - mu * fn)
        else:
            worst = max(worst, abs(f[0]) - f_grip_max, abs(f[1]) - f_grip_max)
    return worst


# ---------------------------------------------------------------- placements

def environment_contacts(T: PlanarPose, world: WorldDescription, tol: float = 1e-9):
    """Object vertices lying on a support surface (within ``tol``), with the surface normal."""
    out = []
    for v in world.object_polygon(T):
        for s in world.supports:
            n, t = s.normal, s.tangent
            h = (v[0] - s.a[0]) * n[0] + (v[1] - s.a[1]) * n[1]
            u = (v[0] - s.a[0]) * t[0] + (v[1] - s.a[1]) * t[1]
            L = math.hypot(s.b[0] - s.a[0], s.b[1] - s.a[1])
            if abs(h) <= tol and -tol <= u <= L + tol:
                out.append((v, n))
                break
    return out


def placement_contacts(T: PlanarPose, world: WorldDescription, G: GraspSet,
                       holding: Sequence[int]) -> ContactSet:
    cs = ContactSet()
    for v, n in environment_contacts(T, world):
        cs.add_env(v, n)
    for i in holding:
        cs.add_grasp(compose(T, G[i]).translation, i)
    return cs


def placement_equilibrium(T: PlanarPose, world: WorldDescription, G: GraspSet,
                          holding: Sequence[int]) -> EquilibriumResult:
    cs = placement_contacts(T, world, G, holding)
    if cs.n_env == 0 or len(cs) == 0:
        return EquilibriumResult(False)
    w = gravito_inertial_wrench(world.mass, T.apply(world.com), world.gravity)
    return equilibrium_feasible(w, cs, world.friction_mu, world.grip_force_max)


def _rotate_about(T: PlanarPose, pivot, delta: float) -> PlanarPose:
    c, s = math.cos(delta), math.sin(delta)
    dx, dy = T.x - pivot[0], T.y - pivot[1]
    return PlanarPose(pivot[0] + c * dx - s * dy, pivot[1] + s * dx + c * dy, T.theta + delta)


def _nearest_support(T: PlanarPose, world: WorldDescription):
    poly = world.object_polygon(T)
    best = None
    for s in world.supports:
        n, t = s.normal, s.tangent
        L = math.hypot(s.b[0] - s.a[0], s.b[1] - s.a[1])
        cx = sum(p[0] for p in poly) / len(poly)
        cy = sum(p[1] for p in poly) / len(poly)
        u = (cx - s.a[0]) * t[0] + (cy - s.a[1]) * t[1]
        if u < 0.0 or u > L:
            continue
        h = min((p[0] - s.a[0]) * n[0] + (p[1] - s.a[1]) * n[1] for p in poly)
        if h < -world.contact_tol:
            continue
        if best is None or h < best[0]:
            best = (h, s)
    return None if best is None else best[1]


def align_edge(T: PlanarPose, world: WorldDescription, surface) -> PlanarPose:
    """Rotate minimally (about the lowest vertex) so the closest edge lies parallel to ``surface``."""
    poly = world.object_polygon(T)
    n = surface.normal
    heights = [(p[0] - surface.a[0]) * n[0] + (p[1] - surface.a[1]) * n[1] for p in poly]
    i = min(range(len(poly)), key=lambda k: heights[k])
    target = math.atan2(-n[1], -n[0])
    best = None
    for a, b in ((poly[i - 1], poly[i]), (poly[i], poly[(i + 1) % len(poly)])):
        outward = math.atan2(-(b[0] - a[0]), b[1] - a[1])  # right normal of a CCW edge
        delta = wrap_angle(target - outward)
        if best is None or abs(delta) < abs(best):
            best = delta
    if abs(best) < 1e-12:
        return T
    return _rotate_about(T, poly[i], best)


def drop_onto(T: PlanarPose, world: WorldDescription, surface) -> PlanarPose:
    """Translate along the surface normal until the object touches it."""
    n = surface.normal
    h = min((p[0] - surface.a[0]) * n[0] + (p[1] - surface.a[1]) * n[1]
            for p in world.object_polygon(T))
    if h == 0.0:
        return T
    return PlanarPose(T.x - h * n[0], T.y - h * n[1], T.theta)


@dataclass(frozen=True)
class PlacementParams:
    sigma_t: float = 0.02
    sigma_r: float = 0.05
    max_iters: int = 30
    n_jitter: int = 2


def sample_placement_config(T_obj: PlanarPose, world: WorldDescription, G: GraspSet,
                            rng: np.random.Generator, released: Sequence[int] | None = None,
                            params: PlacementParams = PlacementParams()) -> PlanarPose | None:
    """Search for a resting pose near ``T_obj`` that keeps the object in equilibrium.

    Each candidate must be reachable by every arm, free of object/obstacle
    collisions, and in equilibrium with each arm in ``released`` (default:
    every arm, one at a time) letting go.
    """
    k = len(world.arms)
    released = list(range(k)) if released is None else list(released)
    for it in range(params.max_iters):
        if it == 0:
            T = T_obj
        else:
            dx, dy = rng.normal(0.0, params.sigma_t, 2)
            T = PlanarPose(T_obj.x + dx, T_obj.y + dy, T_obj.theta + rng.normal(0.0, params.sigma_r))
        surface = _nearest_support(T, world)
        if surface is None:
            continue
        bases = [drop_onto(align_edge(T, world, surface), world, surface), drop_onto(T, world, surface)]
        jitter = [0.0] + list(rng.normal(0.0, params.sigma_t, params.n_jitter))
        tx, ty = surface.tangent
        for base in bases:
            for j in jitter:
                cand = base if j == 0.0 else PlanarPose(base.x + j * tx, base.y + j * ty, base.theta)
                if placement_ok(cand, world, G, released):
                    return cand
    return None


def placement_ok(T: PlanarPose, world: WorldDescription, G: GraspSet, released: Sequence[int]) -> bool:
    if not environment_contacts(T, world):
        return False
    poly = world.object_polygon(T)
    if any(_segment_hits_polygon(s.a, s.b, poly) for s in world.obstacles):
        return False
    for arm, g in zip(world.arms, G):
        if not enumerate_ik(arm, compose(T, g)):
            return False
    k = len(world.arms)
    for r in released:
        if not placement_equilibrium(T, world, G, [i for i in range(k) if i != r]):
            return False
    return True

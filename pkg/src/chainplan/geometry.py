"""Rigid-body pose algebra for planar (SE(2)) and spatial (SE(3)) poses.

Planar poses are the working type of the planner; spatial poses share the same
interface (compose, invert, distance, interpolation, sampling) so a spatial
backend can reuse the rest of the pipeline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

TWO_PI = 2.0 * math.pi
DEFAULT_W_ROT = 0.3  # m per rad


def wrap_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    r = math.pi - math.fmod(math.pi - theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    elif r > math.pi:
        r -= TWO_PI
    return r


@dataclass(frozen=True)
class PlanarPose:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def translation(self) -> tuple[float, float]:
        return (self.x, self.y)

    def apply(self, point: Sequence[float]) -> tuple[float, float]:
        """Transform a point from this frame into the parent frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        px, py = point[0], point[1]
        return (self.x + c * px - s * py, self.y + s * px + c * py)

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]])

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.theta]


@dataclass(frozen=True)
class SpatialPose:
    t: tuple[float, float, float] = (0.0, 0.0, 0.0)
    q: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)  # w, x, y, z

    def __post_init__(self):
        t = tuple(float(v) for v in self.t)
        q = np.asarray(self.q, dtype=float)
        n = float(np.linalg.norm(q))
        if n == 0.0:
            raise ValueError("zero quaternion")
        object.__setattr__(self, "t", t)
        if abs(n - 1.0) > 4e-16:  # leave unit quaternions bit-exact so JSON round-trips
            q = q / n
        object.__setattr__(self, "q", tuple(float(v) for v in q))

    @property
    def translation(self) -> tuple[float, float, float]:
        return self.t

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def apply(self, point: Sequence[float]) -> tuple[float, float, float]:
        p = self.rotation_matrix() @ np.asarray(point, dtype=float) + np.asarray(self.t)
        return tuple(float(v) for v in p)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation_matrix()
        m[:3, 3] = self.t
        return m


Pose = Union[PlanarPose, SpatialPose]


def _qmul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def _qconj(q):
    return (q[0], -q[1], -q[2], -q[3])


def identity_like(p: Pose) -> Pose:
    return PlanarPose() if isinstance(p, PlanarPose) else SpatialPose()


def compose(a: Pose, b: Pose) -> Pose:
    """Return a * b (apply b in the frame of a)."""
    if isinstance(a, PlanarPose) and isinstance(b, PlanarPose):
        c, s = math.cos(a.theta), math.sin(a.theta)
        return PlanarPose(a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.theta + b.theta)
    if isinstance(a, SpatialPose) and isinstance(b, SpatialPose):
        return SpatialPose(a.apply(b.t), _qmul(a.q, b.q))
    raise TypeError("cannot mix planar and spatial poses")


def invert(a: Pose) -> Pose:
    if isinstance(a, PlanarPose):
        c, s = math.cos(a.theta), math.sin(a.theta)
        return PlanarPose(-(c * a.x + s * a.y), s * a.x - c * a.y, -a.theta)
    qi = _qconj(a.q)
    t = SpatialPose((0.0, 0.0, 0.0), qi).apply(a.t)
    return SpatialPose(tuple(-v for v in t), qi)


def rotation_geodesic(a: Pose, b: Pose) -> float:
    """Minimal rotation angle between the orientations of a and b, in [0, pi]."""
    if isinstance(a, PlanarPose):
        return abs(wrap_angle(b.theta - a.theta))
    d = abs(sum(x * y for x, y in zip(a.q, b.q)))
    return 2.0 * math.acos(min(1.0, d))


def pose_distance(a: Pose, b: Pose, w_rot: float = DEFAULT_W_ROT) -> float:
    """Translation distance plus ``w_rot`` times the rotation geodesic."""
    if isinstance(a, PlanarPose):
        dt = math.hypot(b.x - a.x, b.y - a.y)
    else:
        dt = math.dist(a.t, b.t)
    return dt + w_rot * rotation_geodesic(a, b)


def poses_close(a: Pose, b: Pose, tol: float = 1e-9) -> bool:
    if isinstance(a, PlanarPose):
        return (abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol
                and abs(wrap_angle(a.theta - b.theta)) <= tol)
    return pose_distance(a, b, 1.0) <= tol


def sample_object_pose(bounds, rng: np.random.Generator, spatial: bool = False) -> Pose:
    """Uniform translation in the box ``bounds = (lo, hi)`` and uniform rotation.

    Degenerate boxes are allowed; a collapsed axis returns its bound exactly.
    Planar bounds may carry a third entry per corner restricting the angle.
    """
    lo, hi = bounds
    n = 3 if spatial else 2
    ranged = not spatial and len(lo) == 3 and len(hi) == 3
    if not ranged and (len(lo) != n or len(hi) != n):
        raise ValueError(f"bounds must have {n} entries per corner")
    t = []
    for a, b in zip(lo, hi):
        if a > b:
            raise ValueError("bounds must satisfy min <= max")
        u = rng.random()
        t.append(a if a == b else a + (b - a) * u)
    if not spatial:
        if ranged:
            return PlanarPose(t[0], t[1], t[2])
        # uniform on [-pi, pi); wrap sends -pi to pi
        return PlanarPose(t[0], t[1], rng.uniform(-math.pi, math.pi))
    # Shoemake's subgroup algorithm
    u1, u2, u3 = rng.random(3)
    a, b = math.sqrt(1.0 - u1), math.sqrt(u1)
    q = (b * math.cos(TWO_PI * u3), a * math.sin(TWO_PI * u2),
         a * math.cos(TWO_PI * u2), b * math.sin(TWO_PI * u3))
    return SpatialPose(tuple(t), q)


class PosePath:
    """Straight-line translation with shortest-geodesic rotation between two poses."""

    kind = "linear-geodesic"

    def __init__(self, start: Pose, end: Pose, w_rot: float = DEFAULT_W_ROT):
        self.start = start
        self.end = end
        self.duration = 1.0
        if isinstance(start, PlanarPose):
            self._dtheta = wrap_angle(end.theta - start.theta)
        else:
            rel = _qmul(_qconj(start.q), end.q)
            if rel[0] < 0.0:
                rel = tuple(-v for v in rel)
            elif rel[0] == 0.0:
                # antipodal tie: fix the sign of the first nonzero vector component
                for v in rel[1:]:
                    if v != 0.0:
                        if v < 0.0:
                            rel = tuple(-c for c in rel)
                        break
            self._rel = rel
        # Lipschitz constant of eval in the pose metric
        self.lipschitz = pose_distance(start, end, w_rot)
        self.w_rot = w_rot

    def length(self, w_rot: float | None = None) -> float:
        return pose_distance(self.start, self.end, self.w_rot if w_rot is None else w_rot)

    def eval(self, s: float) -> Pose:
        if s <= 0.0:
            return self.start
        if s >= 1.0:
            return self.end
        a, b = self.start, self.end
        if isinstance(a, PlanarPose):
            return PlanarPose(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
                              a.theta + s * self._dtheta)
        t = tuple(x + s * (y - x) for x, y in zip(a.t, b.t))
        w = max(-1.0, min(1.0, self._rel[0]))
        half = math.acos(w)
        if half < 1e-12:
            return SpatialPose(t, a.q)
        k = math.sin(s * half) / math.sin(half)
        step = (math.cos(s * half),) + tuple(k * v for v in self._rel[1:])
        return SpatialPose(t, _qmul(a.q, step))


def interpolate_pose_path(a: Pose, b: Pose, w_rot: float = DEFAULT_W_ROT) -> PosePath:
    return PosePath(a, b, w_rot)


def discretize_path(path: PosePath, step: float, w_rot: float | None = None) -> list[Pose]:
    """Samples from start to end inclusive, consecutive gaps at most ``step``.

    The number of intervals is ``max(1, ceil(length / step))``; the first and
    last entries are the path's own endpoints.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    n = max(1, math.ceil(path.length(w_rot) / step))
    return [path.start] + [path.eval(i / n) for i in range(1, n)] + [path.end]


def pose_to_json(p: Pose) -> dict:
    if isinstance(p, PlanarPose):
        return {"planar": [p.x, p.y, p.theta]}
    return {"spatial": {"t": list(p.t), "q": list(p.q)}}


def pose_from_json(d: dict) -> Pose:
    if "planar" in d:
        x, y, th = d["planar"]
        return PlanarPose(x, y, th)
    if "spatial" in d:
        s = d["spatial"]
        return SpatialPose(tuple(s["t"]), tuple(s["q"]))
    raise ValueError(f"unrecognised pose object: {d!r}")

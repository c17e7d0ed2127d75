from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace

from .equilibrium import PlacementParams
from .geometry import DEFAULT_W_ROT
from .kinematics import DiffIKParams


@dataclass(frozen=True)
class PlannerParams:
    N_max: int = 2000            # stage-1 iterations
    R_max: int = 1               # regrasp budget
    step: float = 0.05           # object-path discretization (pose metric)
    d_ext: float = 0.4           # extension clamp distance
    w_rot: float = DEFAULT_W_ROT
    eps_boundary: float = 0.05   # rad
    seed: int = 0
    bounds: tuple = ((-0.5, 0.0), (0.5, 0.5))  # translation sampling box (lo, hi)
    goal_heuristic: str = "nearest"            # random | nearest | most-flexible
    r_blacklist: float = 0.1
    refine_depth: int = 8        # bisections of a failing step before classifying the failure
    ik: DiffIKParams = field(default_factory=DiffIKParams)
    placement: PlacementParams = field(default_factory=PlacementParams)
    switch_attempts: int = 20    # stage-2 attempts per flagged vertex
    regrasp_iters: int = 3000    # joint-space BiRRT iterations
    regrasp_step: float = 0.3    # BiRRT extension length, rad
    regrasp_resolution: float = 0.02
    shortcut_attempts: int = 100
    retreat: float = 0.05        # gripper retreat along the approach axis, m
    retreat_steps: int = 5
    audit: bool = False

    def __post_init__(self):
        if self.N_max <= 0 or self.step <= 0 or self.d_ext <= 0 or self.w_rot <= 0:
            raise ValueError("N_max, step, d_ext and w_rot must be positive")
        if self.R_max < 0:
            raise ValueError("R_max must be nonnegative")
        if self.eps_boundary <= 0 or self.r_blacklist < 0:
            raise ValueError("eps_boundary must be positive and r_blacklist nonnegative")
        if self.goal_heuristic not in ("random", "nearest", "most-flexible"):
            raise ValueError(f"unknown goal heuristic {self.goal_heuristic!r}")
        lo, hi = self.bounds
        object.__setattr__(self, "bounds", (tuple(float(v) for v in lo), tuple(float(v) for v in hi)))

    def override(self, **kw) -> "PlannerParams":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_json(self) -> dict:
        d = asdict(self)
        d["bounds"] = [list(self.bounds[0]), list(self.bounds[1])]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PlannerParams":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown planner parameters: {sorted(unknown)}")
        if "ik" in d:
            d["ik"] = DiffIKParams(**d["ik"])
        if "placement" in d:
            d["placement"] = PlacementParams(**d["placement"])
        if "bounds" in d:
            d["bounds"] = tuple(tuple(v) for v in d["bounds"])
        return cls(**d)

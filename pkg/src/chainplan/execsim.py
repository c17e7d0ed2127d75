"""Leader-follower execution of a plan with position-based force control on the follower.

Arm 0 (leader) tracks its planned joints exactly. Arm 1 (follower) is commanded
``q = q_t + q_c`` where the compliance margin ``q_c`` accumulates joint
corrections driven by the force error at the follower's grasp. There is no
force sensor: the grasp behaves as a linear spring whose rest state is the
planned relative pose, so a follower base offset turns into a wrench.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PlanarPose, wrap_angle
from .kinematics import forward_kinematics, jacobian
from .plan import ClosedChainSegment, CompositePlan
from .world import WorldDescription

SINGULAR_J = "SINGULAR_J"
DIVERGED = "DIVERGED"


@dataclass(frozen=True)
class ControlGains:
    k_p: float = 1e-3
    k_v: float = 1e-4
    dt: float = 0.008

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.k_p < 0 or self.k_v < 0:
            raise ValueError("gains must be nonnegative")


OFF = ControlGains(0.0, 0.0)


def compliance_step(f_e_now, f_e_prev, gains: ControlGains, J, q_c_prev, cond_max: float = 1e8,
                    damping: float = 1e-3):
    """One accumulation of the compliance margin.

    Returns ``(q_c_next, singular)``; ``singular`` is set when J was too badly
    conditioned and a damped pseudo-inverse replaced the inverse.
    """
    f_e_now = np.asarray(f_e_now, float)
    x_f = gains.k_p * f_e_now + gains.k_v * (f_e_now - np.asarray(f_e_prev, float)) / gains.dt
    J = np.asarray(J, float)
    singular = J.shape[0] != J.shape[1] or not np.isfinite(np.linalg.cond(J)) \
        or np.linalg.cond(J) > cond_max
    if singular:
        q_f = J.T @ np.linalg.solve(J @ J.T + damping ** 2 * np.eye(J.shape[0]), x_f)
    else:
        q_f = np.linalg.solve(J, x_f)
    return np.asarray(q_c_prev, float) + q_f, singular


@dataclass
class StepRecord:
    step: int
    phase: int
    kind: str            # closed_chain | ik_switch
    q_t: list
    q_c: list
    q: list
    f_r: list
    f_e: list
    residual: float
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ExecutionTrace:
    records: list = field(default_factory=list)
    aborted: str | None = None
    gains: ControlGains = OFF
    offset: tuple = (0.0, 0.0)

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_json()) for r in self.records]
        if self.aborted:
            lines.append(json.dumps({"aborted": self.aborted, "step": len(self.records)}))
        return "\n".join(lines) + "\n"

    def max_force_error(self) -> float:
        return max((math.hypot(*r.f_e[:2]) for r in self.records), default=0.0)

    def steady_state_force(self, tail: float = 0.2) -> float:
        """Mean force-error magnitude over the last ``tail`` fraction of compliant steps."""
        recs = [r for r in self.records if r.kind == "closed_chain"]
        if not recs:
            return 0.0
        n = max(1, int(len(recs) * tail))
        return float(np.mean([math.hypot(*r.f_e[:2]) for r in recs[-n:]]))


def _shift_base(arm, offset):
    b = arm.base
    return type(arm)(PlanarPose(b.x + offset[0], b.y + offset[1], b.theta), arm.link_lengths,
                     arm.q_lower, arm.q_upper, arm.name)


def _steps(plan: CompositePlan, follower: int, max_step: float):
    """(phase index, kind, follower q_t, grasping, regrasped) for every control instant.

    Consecutive waypoints are joined by joint-space interpolation so no joint
    moves more than ``max_step`` per instant.
    """
    prev = None
    for item in _waypoints(plan, follower):
        q = item[2]
        if prev is not None and item[3] and not item[4]:
            gap = max(abs(a - b) for a, b in zip(prev, q))
            n = math.ceil(gap / max_step)
            for i in range(1, n):
                yield item[:2] + (tuple(a + (b - a) * i / n for a, b in zip(prev, q)),) + item[3:]
        prev = q
        yield item


def _waypoints(plan: CompositePlan, follower: int):
    for n, p in enumerate(plan.phases):
        if isinstance(p, ClosedChainSegment):
            for c in p.waypoints:
                yield n, "closed_chain", c.arm_configs[follower], True, False
            continue
        a = p.action
        for c in a.go:
            yield n, "ik_switch", c.arm_configs[follower], True, False
        for s in a.switches:
            released = s.arm
            for q in s.joint_path():
                yield (n, "ik_switch", q if released == follower else s.before.arm_configs[follower],
                       False, False)
            yield n, "ik_switch", s.after.arm_configs[follower], True, released == follower
        for c in a.back:
            yield n, "ik_switch", c.arm_configs[follower], True, False


def simulate_execution(plan: CompositePlan, world: WorldDescription, gains: ControlGains = ControlGains(),
                       offset=(0.0, 0.0), stiffness: float = 1000.0, f_break: float = 200.0,
                       f_ideal=(0.0, 0.0, 0.0), follower: int = 1,
                       joint_speed: float = 0.5) -> ExecutionTrace:
    """Step through every plan instant at period ``gains.dt``.

    Compliance runs only on closed-chain segments; switch phases replay
    open-loop with the margin held, and a follower regrasp clears it.
    ``joint_speed`` (rad/s) sets how finely waypoints are interpolated.
    """
    arm_nom = world.arms[follower]
    arm_act = _shift_base(arm_nom, offset)
    K = stiffness
    f_i = np.asarray(f_ideal, float)
    trace = ExecutionTrace(gains=gains, offset=tuple(offset))
    q_c = np.zeros(arm_nom.dof)
    f_prev = None
    for k, (n, kind, q_t, grasping, regrasped) in enumerate(_steps(plan, follower, joint_speed * gains.dt)):
        if regrasped:
            q_c = np.zeros(arm_nom.dof)
            f_prev = None
        q_t = np.asarray(q_t, float)
        q = q_t + q_c
        flags = []
        if grasping:
            want = forward_kinematics(arm_nom, q_t)
            have = forward_kinematics(arm_act, q)
            err = np.array([want.x - have.x, want.y - have.y, wrap_angle(want.theta - have.theta)])
        else:
            err = np.zeros(3)
        f_r = K * err
        f_e = f_r - f_i
        rec = StepRecord(k, n, kind, q_t.tolist(), q_c.tolist(), q.tolist(), f_r.tolist(),
                         f_e.tolist(), float(np.linalg.norm(err[:2])), flags)
        trace.records.append(rec)
        if not np.all(np.isfinite(f_r)) or math.hypot(f_r[0], f_r[1]) > f_break:
            trace.aborted = DIVERGED
            break
        if kind == "closed_chain" and grasping:
            prev = f_e if f_prev is None else f_prev
            q_c, singular = compliance_step(f_e, prev, gains, jacobian(arm_act, q), q_c)
            if singular:
                flags.append(SINGULAR_J)
            f_prev = f_e
    return trace

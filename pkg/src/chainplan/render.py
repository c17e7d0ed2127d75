"""Deterministic SVG snapshots of a plan.

Playback gives every waypoint-to-waypoint interval one second; frames sample
that timeline at ``fps`` (sample-and-hold, no interpolation), so the frame
count is ``round(duration * fps) + 1``.
"""
from __future__ import annotations

import math
from pathlib import Path

from .kinematics import joint_points
from .plan import ClosedChainSegment, CompositePlan
from .world import CompositeConfig, WorldDescription

SCALE = 500.0  # px per metre
MARGIN = 0.1
ARM_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def plan_states(plan: CompositePlan) -> list[tuple[CompositeConfig, str]]:
    """Every composite state of the plan in execution order, with its phase label."""
    out = []
    for p in plan.phases:
        if isinstance(p, ClosedChainSegment):
            out += [(c, "closed_chain") for c in p.waypoints]
            continue
        a = p.action
        out += [(c, "go") for c in a.go]
        for s in a.switches:
            for label, qs in (("retreat", s.retreat), ("swing", s.swing), ("approach", s.approach)):
                out += [(s.before.with_arm(s.arm, q), f"{label} arm {s.arm}") for q in qs]
        out += [(c, "back") for c in a.back]
    return out


def _fmt(v: float) -> str:
    return f"{v:.5f}"


class _Frame:
    def __init__(self, world: WorldDescription):
        xs, ys = [], []
        for arm in world.arms:
            reach = sum(arm.link_lengths)
            xs += [arm.base.x - reach, arm.base.x + reach]
            ys += [arm.base.y - reach, arm.base.y + reach]
        for s in list(world.supports) + list(world.obstacles):
            xs += [s.a[0], s.b[0]]
            ys += [s.a[1], s.b[1]]
        self.x0, self.x1 = min(xs) - MARGIN, max(xs) + MARGIN
        self.y0, self.y1 = min(ys) - MARGIN, max(ys) + MARGIN

    def pt(self, p) -> str:
        return f"{_fmt((p[0] - self.x0) * SCALE)},{_fmt((self.y1 - p[1]) * SCALE)}"

    @property
    def size(self):
        return _fmt((self.x1 - self.x0) * SCALE), _fmt((self.y1 - self.y0) * SCALE)


def render_state(c: CompositeConfig, label: str, world: WorldDescription) -> str:
    f = _Frame(world)
    w, h = f.size
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    for s in world.supports:
        lines.append(f'<polyline class="support" points="{f.pt(s.a)} {f.pt(s.b)}" '
                     'stroke="#555555" stroke-width="4" fill="none"/>')
    for s in world.obstacles:
        lines.append(f'<polyline class="obstacle" points="{f.pt(s.a)} {f.pt(s.b)}" '
                     'stroke="#000000" stroke-width="4" fill="none"/>')
    poly = " ".join(f.pt(p) for p in world.object_polygon(c.object_pose))
    lines.append(f'<polygon class="object" points="{poly}" fill="#f5c542" stroke="#8a6d00" '
                 'stroke-width="2"/>')
    width = _fmt(2 * world.link_radius * SCALE)
    for i, (arm, q) in enumerate(zip(world.arms, c.arm_configs)):
        pts = " ".join(f.pt(p) for p in joint_points(arm, q))
        color = ARM_COLORS[i % len(ARM_COLORS)]
        lines.append(f'<polyline class="arm" data-arm="{i}" points="{pts}" stroke="{color}" '
                     f'stroke-width="{width}" stroke-linejoin="round" fill="none"/>')
    lines.append(f'<text x="10" y="24" font-family="monospace" font-size="18">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_frames(plan: CompositePlan, world: WorldDescription, out_dir, fps: float = 10.0) -> list[Path]:
    if fps <= 0:
        raise ValueError("fps must be positive")
    states = plan_states(plan)
    duration = len(states) - 1
    n = int(round(duration * fps)) + 1
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n):
        t = i / fps
        idx = min(len(states) - 1, int(math.floor(t + 1e-9)))
        c, label = states[idx]
        path = out_dir / f"frame_{i:05d}.svg"
        path.write_text(render_state(c, f"t={t:.3f}s {label}", world))
        paths.append(path)
    return paths

"""Command line entry point: ``chainplan plan | check | render | simulate``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .execsim import ControlGains, simulate_execution
from .global_planner import NO_GOAL_IK, PlanningFailure, plan
from .plan import CompositePlan
from .render import render_frames
from .scenario import ScenarioError, dump_json, load_scenario, read_json
from .validate import check_plan

EXIT_OK = 0
EXIT_FAILURE = 2
EXIT_INVALID = 3
EXIT_NO_GOAL_IK = 4
EXIT_VIOLATION = 5
EXIT_DIVERGED = 6

log = logging.getLogger("chainplan")


def _setup_logging() -> bool:
    """Configure logging from CHAINPLAN_LOG; returns True when tree audits are requested."""
    level = os.environ.get("CHAINPLAN_LOG", "").strip().lower()
    if not level:
        logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        return False
    audit = level in ("audit", "debug")
    py_level = logging.DEBUG if audit else getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=py_level, format="%(levelname)s %(name)s: %(message)s")
    return audit


def _load_plan(path) -> CompositePlan:
    d = read_json(path)
    try:
        return CompositePlan.from_json(d)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ScenarioError(f"{path}: invalid plan: {exc!r}") from None


def cmd_plan(args, audit: bool) -> int:
    sc = load_scenario(args.scenario)
    params = sc.planner_params(seed=args.seed, R_max=args.rmax, N_max=args.nmax,
                               audit=True if audit else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stats: dict = {}
    t0 = time.perf_counter()
    status, code, result = "OK", EXIT_OK, None
    try:
        result = plan(sc.start, sc.goal, params, sc.grasps, sc.world, stats)
    except PlanningFailure as exc:
        status = exc.kind
        code = EXIT_NO_GOAL_IK if exc.kind == NO_GOAL_IK else EXIT_FAILURE
        print(f"planning failed: {exc}", file=sys.stderr)
    total = time.perf_counter() - t0
    summary = {
        "schema_version": "1",
        "status": status,
        "seed": params.seed,
        "R_max": params.R_max,
        "N_max": params.N_max,
        "iterations": stats.get("iterations", 0),
        "vertices": stats.get("vertices", 0),
        "failures": stats.get("stage2_failures", 0),
        "regrasps": result.switch_count if result is not None else 0,
        "global_planning_s": stats.get("stage1_time", 0.0),
        "regrasp_planning_s": stats.get("stage2_time", 0.0),
        "total_s": total,
    }
    dump_json(summary, out / "stats.json", indent=1)
    if result is None:
        return code
    violations = check_plan(result, sc, params)
    if violations:
        print(f"emitted plan fails replay: {violations[0]}", file=sys.stderr)
        return EXIT_VIOLATION
    dump_json(result.to_json(), out / "plan.json")
    print(f"plan written to {out / 'plan.json'} ({len(result.phases)} phases, "
          f"{result.switch_count} IK switches, {total:.2f} s)")
    return EXIT_OK


def cmd_check(args, audit: bool) -> int:
    sc = load_scenario(args.scenario)
    p = _load_plan(args.plan)
    violations = check_plan(p, sc)
    if violations:
        print(f"violation: {violations[0]}")
        if len(violations) > 1:
            print(f"({len(violations) - 1} more)")
        return EXIT_VIOLATION
    print("plan ok")
    return EXIT_OK


def cmd_render(args, audit: bool) -> int:
    sc = load_scenario(args.scenario)
    p = _load_plan(args.plan)
    paths = render_frames(p, sc.world, args.out, args.fps)
    print(f"{len(paths)} frames written to {args.out}")
    return EXIT_OK


def cmd_simulate(args, audit: bool) -> int:
    sc = load_scenario(args.scenario)
    p = _load_plan(args.plan)
    gains = ControlGains(args.kp, args.kv, args.dt)
    trace = simulate_execution(p, sc.world, gains, (args.offset_x, args.offset_y),
                               stiffness=args.stiffness)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.jsonl").write_text(trace.to_jsonl())
    summary = {"steps": len(trace.records), "aborted": trace.aborted,
               "max_force_error": trace.max_force_error(),
               "steady_state_force_error": trace.steady_state_force()}
    dump_json(summary, out / "simulate.json", indent=1)
    print(json.dumps(summary))
    return EXIT_DIVERGED if trace.aborted else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chainplan", description="Closed-chain dual-arm planner with IK-switch regrasps.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a scenario and write plan.json and stats.json")
    p.add_argument("scenario")
    p.add_argument("--out", default=".")
    p.add_argument("--seed", type=int)
    p.add_argument("--rmax", type=int, help="regrasp budget")
    p.add_argument("--nmax", type=int, help="stage-1 iteration budget")
    p.set_defaults(func=cmd_plan)

    c = sub.add_parser("check", help="replay a plan against its scenario")
    c.add_argument("plan")
    c.add_argument("scenario")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("render", help="write SVG frames of a plan")
    r.add_argument("plan")
    r.add_argument("scenario")
    r.add_argument("--out", default="frames")
    r.add_argument("--fps", type=float, default=1.0)
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("simulate", help="compliant leader-follower execution with a follower base offset")
    s.add_argument("plan")
    s.add_argument("scenario")
    s.add_argument("--out", default=".")
    s.add_argument("--offset-x", type=float, default=0.005)
    s.add_argument("--offset-y", type=float, default=0.0)
    s.add_argument("--kp", type=float, default=1e-3)
    s.add_argument("--kv", type=float, default=0.0)
    s.add_argument("--dt", type=float, default=0.008)
    s.add_argument("--stiffness", type=float, default=1000.0)
    s.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    audit = _setup_logging()
    try:
        return args.func(args, audit)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

    ucircle run --config scenario.json [--trace out.jsonl]
                [--frames dir --every k] [--summary out.json]
    ucircle batch --configs dir --out dir [--jobs m]
    ucircle oracle sec --points points.json

Exit codes: 0 converged, 1 invalid config, 2 cycle budget exhausted,
3 collision or invariant fault, 4 diagnosed stall.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .geometry import Point, smallest_enclosing_circle_bruteforce
from .global_form import GlobalParams, compute_target_points
from .harness import (
    ConfigError,
    InfeasibleScenario,
    build_algorithm,
    exit_code_for,
    load_config,
    run_scenario,
)
from .svgrender import render_frames


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucircle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--config", required=True, help="scenario JSON file")
    p_run.add_argument("--trace", help="write the JSONL trace here")
    p_run.add_argument("--frames", help="directory for SVG frames")
    p_run.add_argument("--every", type=int, default=10, help="frame every k cycles")
    p_run.add_argument("--summary", help="write the one-line JSON summary here")

    p_batch = sub.add_parser("batch", help="run every scenario in a directory")
    p_batch.add_argument("--configs", required=True, help="directory of scenario JSON files")
    p_batch.add_argument("--out", required=True, help="output directory")
    p_batch.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p_oracle = sub.add_parser("oracle", help="geometry cross-check oracles")
    oracle_sub = p_oracle.add_subparsers(dest="oracle_command", required=True)
    p_sec = oracle_sub.add_parser("sec", help="brute-force smallest enclosing circle")
    p_sec.add_argument("--points", required=True, help="JSON file with a list of [x, y] pairs")

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    try:
        trace, summary = run_scenario(config)
    except InfeasibleScenario as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace.to_jsonl())
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(summary.to_json_line() + "\n")
    if args.frames:
        os.makedirs(args.frames, exist_ok=True)
        _, params = build_algorithm(config)
        if config.algorithm == "global":
            circle = None
            targets = ()
        else:
            circle = params.cir
            targets = params.targets.points
        frames = render_frames(
            trace,
            args.every,
            circle=circle,
            targets=targets,
            with_visibility=config.algorithm != "global",
        )
        for name, doc in sorted(frames.items()):
            with open(os.path.join(args.frames, name), "w", encoding="utf-8") as fh:
                fh.write(doc)
    print(summary.to_json_line())
    return exit_code_for(trace)


def _batch_one(job: tuple[str, str]) -> tuple[str, str, int]:
    path, out_dir = job
    name = os.path.splitext(os.path.basename(path))[0]
    config = load_config(path)
    trace, summary = run_scenario(config)
    with open(os.path.join(out_dir, f"{name}.trace.jsonl"), "w", encoding="utf-8") as fh:
        fh.write(trace.to_jsonl())
    with open(os.path.join(out_dir, f"{name}.summary.json"), "w", encoding="utf-8") as fh:
        fh.write(summary.to_json_line() + "\n")
    return name, summary.outcome, exit_code_for(trace)


def _cmd_batch(args: argparse.Namespace) -> int:
    files = sorted(
        os.path.join(args.configs, f)
        for f in os.listdir(args.configs)
        if f.endswith(".json")
    )
    if not files:
        print(f"no scenario files in {args.configs}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    jobs = [(path, args.out) for path in files]
    worst = 0
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_batch_one, jobs))
        else:
            results = [_batch_one(job) for job in jobs]
    except (ConfigError, InfeasibleScenario, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    for name, outcome, code in results:
        print(f"{name}: {outcome}")
        worst = max(worst, code)
    return worst


def _cmd_oracle_sec(args: argparse.Namespace) -> int:
    try:
        with open(args.points, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        pts = [Point(float(x), float(y)) for x, y in raw]
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"invalid points file: {exc}", file=sys.stderr)
        return 1
    if not pts:
        print("invalid points file: need at least one point", file=sys.stderr)
        return 1
    circle = smallest_enclosing_circle_bruteforce(pts)
    print(
        json.dumps(
            {
                "center": [circle.center.x, circle.center.y],
                "radius": circle.radius,
            }
        )
    )
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "batch":
        return _cmd_batch(args)
    if args.command == "oracle":
        return _cmd_oracle_sec(args)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())

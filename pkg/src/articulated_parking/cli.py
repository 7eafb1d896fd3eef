"""Command-line entry point.

Exit status: 0 on success, 1 on invalid input (bad arguments, scenario or
beacon files), 2 on runtime failure (a run ended in a singularity or a
feedback failure, triangulation failed, or a file could not be written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from .errors import AtGoalSingularityError, InvalidInputError, ParkingError, PositioningError
from .model import _polar_tuple
from .output import render_trajectory_svg, read_trajectory_csv, write_trajectory_csv
from .positioning import BeaconArray, BearingMeasurement, pose_from_bearings
from .scenario import BUNDLED_SCENARIOS, ScenarioFile, load_bundled, parse_scenario_file
from .sim import StopReason, Trajectory, run_jobs

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

_FAILED = (StopReason.SINGULARITY, StopReason.FEEDBACK_FAILURE)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 instead of argparse's 2
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="articulated-parking",
        description="Parking control of a center-articulated robot with beacon feedback.",
    )
    sub = parser.add_subparsers(dest="command", metavar="{simulate,batch,triangulate,plot}")
    sub.required = True

    p = sub.add_parser("simulate", help="run every initial condition of one scenario file")
    p.add_argument("--config", required=True, help=f"scenario JSON (or bundled: {', '.join(BUNDLED_SCENARIOS)})")
    p.add_argument("--out", help="output directory (overrides the file's output.directory)")

    p = sub.add_parser("batch", help="run several scenario files")
    p.add_argument("--config", required=True, nargs="+")
    p.add_argument("--parallel", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out", help="output directory for every scenario")

    p = sub.add_parser("triangulate", help="recover the pose from three bearings")
    p.add_argument("--beacons", required=True, help='JSON file {"A": [x, y], "B": [...], "C": [...]}')
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--beta", required=True, type=float)
    p.add_argument("--gamma", required=True, type=float)

    p = sub.add_parser("plot", help="render a trajectory CSV as SVG")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    return parser


def _load(config: str) -> ScenarioFile:
    path = Path(config)
    if not path.exists() and Path(config).stem in BUNDLED_SCENARIOS and path.parent == Path("."):
        return load_bundled(path.stem)
    return parse_scenario_file(path)


def _write_outputs(sf: ScenarioFile, results: list, out_dir: Path) -> int:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out_dir}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    status = EXIT_OK
    for i, result in enumerate(results):
        stem = sf.name if len(results) == 1 else f"{sf.name}-{i}"
        if isinstance(result, InvalidInputError):
            print(f"error: {stem}: {result}", file=sys.stderr)
            status = max(status, EXIT_INVALID)
            continue
        if isinstance(result, Exception):
            print(f"error: {stem}: {result}", file=sys.stderr)
            status = EXIT_RUNTIME
            continue
        traj: Trajectory = result
        if "csv" in sf.output.formats:
            write_trajectory_csv(traj, out_dir / f"{stem}.csv")
        if "svg" in sf.output.formats:
            render_trajectory_svg(traj, out_dir / f"{stem}.svg", title=stem)
        final = traj.final
        print(
            f"{stem}: {traj.stop_reason.value} at t={final.t:.2f} s "
            f"(e={final.polar.e:.4g}, theta1={final.polar.theta1:.4g}, theta2={final.polar.theta2:.4g})"
        )
        if traj.stop_reason in _FAILED:
            print(f"error: {stem}: {traj.message}", file=sys.stderr)
            status = EXIT_RUNTIME
        elif traj.stop_reason is StopReason.TIME_BUDGET:
            print(f"warning: {stem}: time budget exhausted before reaching the goal", file=sys.stderr)
    return status


def _simulate(configs: list[str], out: str | None, parallel: int) -> int:
    scenarios = [_load(c) for c in configs]
    for sf in scenarios:
        for note in sf.warnings:
            print(f"warning: {sf.name}: {note}", file=sys.stderr)
    jobs, owners = [], []
    for k, sf in enumerate(scenarios):
        for p in sf.initial:
            jobs.append((p, sf.simulation, sf.controller, sf.geometry))
            owners.append(k)
    results = run_jobs(jobs, parallel)
    status = EXIT_OK
    for k, sf in enumerate(scenarios):
        mine = [r for r, o in zip(results, owners) if o == k]
        out_dir = Path(out) if out else Path(sf.output.directory)
        status = max(status, _write_outputs(sf, mine, out_dir))
    return status


def _triangulate(args) -> int:
    path = Path(args.beacons)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidInputError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict) or not {"A", "B", "C"} <= set(data):
        raise InvalidInputError(f"{path}: expected an object with keys A, B, C")
    unknown = set(data) - {"A", "B", "C", "approach_side"}
    if unknown:
        raise InvalidInputError(f"{path}: unknown key {sorted(unknown)[0]!r}")
    beacons = BeaconArray(data["A"], data["B"], data["C"], data.get("approach_side"))
    sol = pose_from_bearings(BearingMeasurement(args.alpha, args.beta, args.gamma), beacons)
    x_r, y_r, theta_r = sol.pose
    try:
        e, t1, t2, _ = _polar_tuple(x_r, y_r, theta_r, 0.0)
    except AtGoalSingularityError:
        # At the goal the polar angles are undefined; report them as null.
        e, t1, t2 = math.hypot(x_r, y_r), None, None
    print(json.dumps({"x_r": x_r, "y_r": y_r, "theta_r": theta_r, "e": e, "theta1": t1, "theta2": t2}))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _simulate([args.config], args.out, 1)
        if args.command == "batch":
            if args.parallel < 1:
                parser.error("--parallel must be at least 1")
            return _simulate(args.config, args.out, args.parallel)
        if args.command == "triangulate":
            return _triangulate(args)
        traj = read_trajectory_csv(args.csv)
        render_trajectory_svg(traj, args.out, title=Path(args.csv).stem)
        return EXIT_OK
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PositioningError, ParkingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


cli_main = main


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points.

Subcommands: build-library, solve, invariance, drive, compare-dp,
serve, replay.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ParetoDriveError
from .params import KMH, ModelParams, load_params


def _params_from(args) -> ModelParams:
    if getattr(args, "params", None):
        return load_params(args.params)
    return ModelParams()


def _add_params_flag(p):
    p.add_argument("--params", help="model parameter file (name = value lines)")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def cmd_build_library(args) -> int:
    from .library import build_library, save
    from .scenarios import Case, GridConfig, count_scenarios
    from .solver import SolverConfig

    params = _params_from(args)
    grid = GridConfig(
        v_lim_set=_floats(args.v_lims), v_step=args.v_step, v_cap=args.v_cap,
        ramps_accel=_floats(args.ramps_accel),
        ramps_decel=_floats(args.ramps_decel),
        ramps_stop=_floats(args.ramps_stop),
        cases=tuple(Case(c) for c in args.cases.split(",")))
    solver = SolverConfig(n_points=args.points)
    total = count_scenarios(grid)
    print(f"solving {total} scenarios ...")

    def progress(done, n):
        if done % 100 == 0 or done == n:
            print(f"  {done}/{n}", flush=True)

    library = build_library(grid, params, solver, workers=args.workers,
                            progress=progress)
    save(library, args.out)
    infeasible = sum(1 for v in library.entries.values()
                     if not hasattr(v, "entries"))
    print(f"wrote {args.out} ({len(library.entries)} scenarios, "
          f"{infeasible} infeasible, hash {library.hash})")
    return 0


def cmd_solve(args) -> int:
    from .scenarios import Case, Scenario
    from .solver import SolverConfig, solve_mocp

    params = _params_from(args)
    scenario = Scenario(Case(args.case), args.v0, args.v_lim, args.ramp)
    front = solve_mocp(scenario, params, SolverConfig(n_points=args.points))
    print(f"# {scenario.describe()}")
    print(f"{'u [N m]':>12} {'J1 [dS]':>14} {'J2 [s]':>10}")
    for e in front.entries:
        print(f"{e.u:>12.4f} {e.objectives.J1:>14.8f} {e.objectives.J2:>10.4f}")
    return 0


def cmd_invariance(args) -> int:
    from .invariance import (GroupAction, report_csv, report_table, run_report)
    from .model import VehicleState
    from .scenarios import Case, Scenario
    from .solver import SolverConfig

    params = _params_from(args)
    x0 = VehicleState(v=args.v0 * KMH, S=0.6)
    scenario = Scenario(Case.ACCELERATE, args.v0, args.v_lim, 0.05)
    actions = [GroupAction("p", 50.0), GroupAction("S", args.soc_delta),
               GroupAction("v", 5.0 * KMH)]
    reports = run_report(actions, x0, args.torque, scenario, params,
                         SolverConfig())
    print(report_table(reports))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report_csv(reports))
        print(f"wrote {args.csv}")
    return 0


def _rho_policy(args):
    from .controller import fixed_rho, heuristic_rho, schedule_rho
    if args.rho is not None:
        return fixed_rho(args.rho)
    if args.rho_schedule:
        schedule = []
        with open(args.rho_schedule, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    p, rho = line.split()
                    schedule.append((float(p), float(rho)))
        return schedule_rho(schedule)
    return heuristic_rho


def cmd_drive(args) -> int:
    from .controller import MpcConfig, run_drive
    from .library import load
    from .track import load_track

    params = _params_from(args)
    track = load_track(args.track)
    library = load(args.library)
    log = run_drive(track, _rho_policy(args), library, params, MpcConfig())
    log.save(args.log)
    print(f"drive finished: t={log.totals.J2:.2f} s, "
          f"dS={log.totals.J1:.6f}; log written to {args.log}")
    return 0


def cmd_compare_dp(args) -> int:
    from .controller import load_drive_log
    from .dp import DpConfig, compare, solve_dp
    from .track import load_track

    params = _params_from(args)
    track = load_track(args.track)
    log = load_drive_log(args.log)
    solution = solve_dp(track, params, DpConfig(beta=args.beta))
    report = compare(log, solution, params, beta=args.beta)
    print(report.table())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.csv())
        print(f"wrote {args.report}")
    return 0


def cmd_serve(args) -> int:
    from .library import load
    from .service import serve
    from .track import load_track

    params = _params_from(args)
    port = int(os.environ.get("PARETODRIVE_PORT", args.port))
    serve(port, load_track(args.track), load(args.library), params,
          speed=args.speed, rho0=args.rho0, log_path=args.log)
    return 0


def cmd_replay(args) -> int:
    from .service import replay
    from .track import load_track

    port = int(os.environ.get("PARETODRIVE_PORT", args.port))
    track = load_track(args.track) if args.track else None
    replay(args.log, port, speed=args.speed, track=track)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paretodrive",
        description="Pareto-front library driving: offline solver, online "
                    "controller, reference baseline, and simulation service.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-library", help="solve a scenario grid")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--v-lims", default="30,50,60,70,100")
    p.add_argument("--v-step", type=float, default=0.1)
    p.add_argument("--v-cap", type=float, default=130.0)
    p.add_argument("--ramps-accel", default="0.05,0.1,0.2")
    p.add_argument("--ramps-decel", default="0.2")
    p.add_argument("--ramps-stop", default="0.5")
    p.add_argument("--cases", default="constant,accelerate,decelerate,stop")
    _add_params_flag(p)
    p.set_defaults(func=cmd_build_library)

    p = sub.add_parser("solve", help="solve one scenario and print its front")
    p.add_argument("--case", required=True,
                   choices=["constant", "accelerate", "decelerate", "stop"])
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--v-lim", type=float, required=True)
    p.add_argument("--ramp", type=float, default=0.0)
    p.add_argument("--points", type=int, default=20)
    _add_params_flag(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("invariance", help="state-translation symmetry report")
    p.add_argument("--v0", type=float, default=60.0)
    p.add_argument("--v-lim", type=float, default=100.0)
    p.add_argument("--torque", type=float, default=100.0)
    p.add_argument("--soc-delta", type=float, default=0.2)
    p.add_argument("--csv")
    _add_params_flag(p)
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("drive", help="drive a track with the MPC controller")
    p.add_argument("--track", required=True)
    p.add_argument("--library", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--rho", type=float)
    group.add_argument("--rho-schedule", help="file of '<from_p> <rho>' lines")
    group.add_argument("--rho-heuristic", action="store_true")
    p.add_argument("--log", required=True)
    _add_params_flag(p)
    p.set_defaults(func=cmd_drive)

    p = sub.add_parser("compare-dp", help="compare a drive log to the DP optimum")
    p.add_argument("--track", required=True)
    p.add_argument("--library", help="unused for the comparison itself; "
                   "accepted for symmetry with drive")
    p.add_argument("--beta", type=float, default=6e-5)
    p.add_argument("--log", required=True)
    p.add_argument("--report")
    _add_params_flag(p)
    p.set_defaults(func=cmd_compare_dp)

    p = sub.add_parser("serve", help="run the interactive simulation service")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--track", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--rho0", type=float, default=0.5)
    p.add_argument("--log")
    _add_params_flag(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="stream a recorded drive log")
    p.add_argument("--log", required=True)
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--track")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParetoDriveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

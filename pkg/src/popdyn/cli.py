"""Command-line entry point (``popdyn``).

Exit codes: 0 success, 2 bad input (game file, flags, preset parameters),
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .analysis import analyze
from .attractors import CYCLE_CAP
from .disolver import CornerHit, solve
from .game import ActionNotAvailable, GameSpecError, check_aggregate
from .lp import LPError
from .presets import BadParameters, build_queuing_preset
from .simulator import SimConfig, batch

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_NUMERIC = 3


class UsageError(ValueError):
    pass


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _emit(data, out: str | None, name: str) -> None:
    text = io.dump_json(data)
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)


def _load(args):
    if not args.game:
        raise UsageError("--game is required")
    return io.load_game(args.game)


def _initial(args, game):
    if args.initial is None:
        return None
    try:
        return check_aggregate(_floats(args.initial, "--initial"), game.n_actions)
    except ValueError as err:
        raise UsageError(f"--initial: {err}") from None


def cmd_preset(args) -> int:
    if args.preset != "queuing":
        raise UsageError(f"unknown preset {args.preset!r}")
    if args.alpha is None:
        raise UsageError("--alpha is required")
    game = build_queuing_preset(args.rho, args.p, args.ps, args.c, _floats(args.alpha, "--alpha"))
    _emit(io.game_to_dict(game), args.out, "game.json")
    return EXIT_OK


def cmd_analyze(args) -> int:
    rep = io.build_report(analyze(_load(args), args.cycle_cap))
    _emit(rep, args.out, "report.json")
    return EXIT_OK


def cmd_regions(args) -> int:
    an = analyze(_load(args), args.cycle_cap)
    _emit({"regions": io.regions_fragment(an), "adjacency": io.adjacency_fragment(an)}, args.out, "regions.json")
    return EXIT_OK


def cmd_rv_graph(args) -> int:
    an = analyze(_load(args), args.cycle_cap)
    _emit({"rv_graph": io.rv_graph_fragment(an), "warnings": an.warnings}, args.out, "rv_graph.json")
    return EXIT_OK


def cmd_cycle_test(args) -> int:
    game = _load(args)
    if game.n_actions != 3:
        raise UsageError("cycle-test needs a game with exactly 3 actions")
    an = analyze(game, args.cycle_cap)
    _emit({"cycle_tests": io.cycle_tests_fragment(an)}, args.out, "cycle_tests.json")
    return EXIT_OK


def cmd_simulate(args) -> int:
    game = _load(args)
    an = analyze(game, args.cycle_cap)
    cfg = SimConfig(args.steps, args.seed, _initial(args, game), args.t0, args.thin)
    res = batch(game, cfg, args.runs, an.attractors, an.regions, an.graph, args.tol_conv, keep_trajectories=True)
    data = {
        "summary": res.summary,
        "attractors": [{"kind": a.kind, "point": a.point.tolist()} for a in an.attractors],
        "runs": [io.limit_report_dict(r) for r in res.reports],
    }
    if args.out is not None:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        for i, traj in enumerate(res.trajectories):
            io.write_trajectory_csv(traj, d / f"trajectory_{i:03d}.csv")
    _emit(data, args.out, "limits.json")
    return EXIT_OK


def cmd_di_solve(args) -> int:
    game = _load(args)
    an = analyze(game, args.cycle_cap)
    start = _initial(args, game)
    if start is None:
        start = np.full(game.n_actions, 1.0 / game.n_actions)
    sol = solve(game, an.regions, an.adjacency, start, args.horizon)
    times = np.linspace(0.0, args.horizon, args.samples)
    summary = {
        "status": sol.status,
        "corner": None if sol.corner is None else sol.corner.tolist(),
        "pieces": [
            {"mode": p.mode, "label": p.label, "t_start": p.t_start, "t_end": p.t_end if np.isfinite(p.t_end) else None}
            for p in sol.pieces
        ],
    }
    if args.out is None:
        summary["samples"] = [[float(t)] + sol.at(t).tolist() for t in times if t <= sol.t_stop]
    else:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        io.write_solution_csv(sol, times, d / "solution.csv")
    _emit(summary, args.out, "solution.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--game", help="game file (JSON)")
    common.add_argument("--out", help="output directory (default: JSON to stdout)")
    common.add_argument("--cycle-cap", type=int, default=CYCLE_CAP)

    p = argparse.ArgumentParser(prog="popdyn", description="Analyze and simulate turn-by-turn population games.")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, text in (
        ("analyze", cmd_analyze, "full analysis report"),
        ("regions", cmd_regions, "regions and their adjacency"),
        ("rv-graph", cmd_rv_graph, "region graph and its cycles"),
        ("cycle-test", cmd_cycle_test, "cycle-existence tests (3 actions)"),
    ):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("simulate", parents=[common], help="stochastic runs")
    sp.add_argument("--steps", type=int, default=10**5)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--thin", type=int, default=100)
    sp.add_argument("--initial", help='starting aggregate "v1,v2,..."')
    sp.add_argument("--t0", type=float, default=1.0)
    sp.add_argument("--tol-conv", type=float, default=0.02)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("di-solve", parents=[common], help="piecewise-analytic mean-dynamics solution")
    sp.add_argument("--initial", help='starting aggregate "v1,v2,..."')
    sp.add_argument("--horizon", type=float, default=10.0)
    sp.add_argument("--samples", type=int, default=1001)
    sp.set_defaults(func=cmd_di_solve)

    sp = sub.add_parser("preset", parents=[common], help="built-in games")
    sp.add_argument("preset", choices=["queuing"])
    sp.add_argument("--rho", type=float, default=0.4)
    sp.add_argument("--p", type=float, default=0.6)
    sp.add_argument("--ps", type=float, default=1.0)
    sp.add_argument("--c", type=float, default=2.0)
    sp.add_argument("--alpha", help='type weights "a1,a2[,a3]"')
    sp.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        return args.func(args)
    except (GameSpecError, BadParameters, ActionNotAvailable, UsageError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SPEC
    except (LPError, ArithmeticError, CornerHit, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

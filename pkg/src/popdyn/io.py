"""Game files, analysis reports and CSV exports.

Game files are JSON with fields ``types``, ``alpha``, ``actions`` (1-based
labels), ``U`` and ``d``. Reports use 1-based action labels as well.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .analysis import Analysis
from .disolver import DISolution
from .game import GameSpec, GameSpecError
from .simulator import LimitReport, Trajectory

TIMESTAMP_FIELD = "generated_at"


class GameParseError(GameSpecError):
    pass


def game_to_dict(game: GameSpec) -> dict:
    return {
        "types": list(game.type_names),
        "alpha": game.alpha.tolist(),
        "actions": [[a + 1 for a in acts] for acts in game.action_sets],
        "U": game.U.tolist(),
        "d": game.d.tolist(),
    }


def _number_array(value, path: str, shape: tuple[int, ...]) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise GameSpecError(path, "expected numbers") from None
    if arr.shape != shape:
        raise GameSpecError(path, f"expected shape {list(shape)}, got {list(arr.shape)}")
    return arr


def game_from_dict(data: Any) -> GameSpec:
    if not isinstance(data, dict):
        raise GameSpecError("<root>", "expected an object")
    for key in ("types", "alpha", "actions", "U", "d"):
        if key not in data:
            raise GameSpecError(key, "missing field")
    types = data["types"]
    if not isinstance(types, list) or not types or not all(isinstance(t, str) for t in types):
        raise GameSpecError("types", "expected a nonempty list of names")
    n = len(types)
    alpha = _number_array(data["alpha"], "alpha", (n,))
    if not isinstance(data["U"], list) or len(data["U"]) != n:
        raise GameSpecError("U", f"expected {n} matrices")
    try:
        k = len(data["U"][0])
    except TypeError:
        raise GameSpecError("U[0]", "expected a square matrix") from None
    U = np.empty((n, k, k))
    for i in range(n):
        U[i] = _number_array(data["U"][i], f"U[{i}]", (k, k))
    d = _number_array(data["d"], "d", (n, k))
    actions = data["actions"]
    if not isinstance(actions, list) or len(actions) != n:
        raise GameSpecError("actions", f"expected {n} action lists")
    sets = []
    for i, acts in enumerate(actions):
        if not isinstance(acts, list) or not acts:
            raise GameSpecError(f"actions[{i}]", "expected a nonempty list")
        for a in acts:
            if not isinstance(a, int) or isinstance(a, bool) or not 1 <= a <= k:
                raise GameSpecError(f"actions[{i}]", f"action {a!r} out of range 1..{k}")
        sets.append(tuple(a - 1 for a in acts))
    if abs(alpha.sum() - 1.0) > 1e-12:
        raise GameSpecError("alpha", f"entries sum to {float(alpha.sum())!r}, not 1")
    return GameSpec(tuple(types), alpha, tuple(sets), U, d)


def load_game(path) -> GameSpec:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise GameParseError(str(path), f"cannot read file: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise GameParseError(str(path), f"invalid JSON: {err}") from None
    return game_from_dict(data)


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_game(game: GameSpec, path) -> None:
    Path(path).write_text(dump_json(game_to_dict(game)))


def _labels(profile: Sequence[int]) -> list[int]:
    return [int(a) + 1 for a in profile]


def _floats(v) -> list[float]:
    return [float(x) for x in np.asarray(v).ravel()]


def _finite(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


def regions_fragment(analysis: Analysis) -> list[dict]:
    return [{"id": r.id, "e": _labels(r.e), "b": _floats(r.b), "witness": _floats(r.witness)} for r in analysis.regions]


def adjacency_fragment(analysis: Analysis) -> list[dict]:
    g = analysis.game
    return [
        {
            "pair": [rec.v, rec.w],
            "type": g.type_names[rec.theta],
            "actions": [rec.a + 1, rec.a_alt + 1],
            "classification": rec.classification,
            "h_at_targets": [rec.h_bv, rec.h_bw],
        }
        for rec in analysis.adjacency
    ]


def attractors_fragment(analysis: Analysis) -> list[dict]:
    g = analysis.game
    out = []
    for att, verdict in zip(analysis.attractors, analysis.mfe):
        mu = att.mfe_profile(g)
        entry = {
            "kind": att.kind,
            "point": _floats(att.point),
            "support": [int(v) for v in att.support],
            "lambda": _floats(att.weights),
            "mfe": {
                "profile": {g.type_names[t]: _floats(mu[t]) for t in range(g.n_types)},
                "is_mfe": verdict.is_mfe,
                "violations": list(verdict.violations),
            },
            "conjectural": att.conjectural,
        }
        if att.one_sided is not None:
            entry["one_sided_drift"] = list(att.one_sided)
        out.append(entry)
    return out


def rv_graph_fragment(analysis: Analysis) -> dict:
    gr = analysis.graph
    return {
        "edges": [list(e) for e in gr.edges],
        "cycles": [list(c) for c in gr.cycles],
        "complete": gr.complete,
    }


def cycle_tests_fragment(analysis: Analysis) -> list[dict]:
    out = []
    for t in analysis.cycle_tests:
        entry = {
            "cycle": list(t.cycle),
            "set1_holds": t.set1_holds,
            "set2_holds": t.set2_holds,
            "fixed_point": None if t.fixed_point is None else float(t.fixed_point),
            "certificate": None,
            "error": t.error,
        }
        if t.certificate is not None:
            entry["certificate"] = {
                "region_sequence": list(t.certificate.region_sequence),
                "switch_points": [_floats(p) for p in t.certificate.switch_points],
                "switch_times": [float(x) for x in t.certificate.switch_times],
                "valid": t.certificate_valid,
                "residuals": {k: float(v) for k, v in sorted(t.residuals.items())},
            }
        out.append(entry)
    return out


def build_report(analysis: Analysis, timestamp: bool = True) -> dict:
    report = {
        "game": game_to_dict(analysis.game),
        "regions": regions_fragment(analysis),
        "adjacency": adjacency_fragment(analysis),
        "attractors": attractors_fragment(analysis),
        "rv_graph": rv_graph_fragment(analysis),
        "cycle_tests": cycle_tests_fragment(analysis),
        "warnings": list(analysis.warnings),
    }
    if timestamp:
        report[TIMESTAMP_FIELD] = datetime.now(timezone.utc).isoformat()
    return report


def strip_timestamp(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != TIMESTAMP_FIELD}


# CSV


def write_trajectory_csv(traj: Trajectory, path) -> None:
    k = traj.omega.shape[1]
    tau = traj.tau
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "tau"] + [f"omega_{a + 1}" for a in range(k)] + ["type_drawn", "action_chosen"])
        for i in range(traj.sample_steps.size):
            th, a = int(traj.type_drawn[i]), int(traj.action_chosen[i])
            w.writerow(
                [int(traj.sample_steps[i]), repr(float(tau[i]))]
                + [repr(float(x)) for x in traj.omega[i]]
                + ["" if th < 0 else th + 1, "" if a < 0 else a + 1]
            )


def write_solution_csv(solution: DISolution, times: Sequence[float], path) -> None:
    k = solution.pieces[0].start.size if solution.pieces else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"omega_{a + 1}" for a in range(k)] + ["mode", "region_or_pair"])
        for t in times:
            if t > solution.t_stop:
                break
            piece = solution.piece_at(t)
            w.writerow([repr(float(t))] + [repr(float(x)) for x in piece.at(t)] + [piece.mode, piece.label])


def limit_report_dict(rep: LimitReport) -> dict:
    return {
        "terminal": _floats(rep.terminal),
        "nearest_attractor": rep.nearest,
        "distance": _finite(rep.distance),
        "classification": rep.classification,
        "region_sequence": list(rep.region_sequence),
        "lap_cycle": rep.lap_cycle,
        "laps": rep.laps,
    }

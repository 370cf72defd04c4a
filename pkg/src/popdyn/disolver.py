"""Closed-form solutions of the mean dynamics with discontinuous drift.

Inside a region the state relaxes exponentially toward the region's drift
target. At a border the solution either crosses (both targets on the far
side) or slides along it toward the point where the two targets balance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .game import BorderFun, CompiledGame, GameSpec, check_aggregate, make_border
from .regions import (
    AdjacencyRecord,
    RegionVertex,
    classify_product,
    facet_constraints,
    profile_at,
    region_lookup,
)

HIT_TOL = 1e-10
CORNER_TOL = 1e-8
CONVERGE_TOL = 1e-10


class NoCrossing(ValueError):
    pass


class NotAttracting(ValueError):
    pass


class CornerHit(RuntimeError):
    pass


@dataclass(frozen=True)
class ExitResult:
    tau: float
    hit: np.ndarray


def exit_time(start, target, boundary: BorderFun) -> ExitResult:
    """Time for ``b + (start - b) e^{-t}`` to reach ``boundary = 0``.

    ``target`` is a drift target vector or a :class:`RegionVertex`.
    """
    b = target.b if isinstance(target, RegionVertex) else np.asarray(target, dtype=float)
    x = np.asarray(start, dtype=float)
    hs, hb = boundary(x), boundary(b)
    if hs == 0.0:
        return ExitResult(0.0, x.copy())
    if not hs * hb < 0:
        raise NoCrossing(f"border values {hs:.3g} at start and {hb:.3g} at the target have the same sign")
    tau = math.log((hs - hb) / (-hb))
    return ExitResult(tau, b + (x - b) * math.exp(-tau))


def sliding_target(b_i, b_j, border: BorderFun, classification: str | None = None) -> np.ndarray:
    """Point of the segment ``[b_i, b_j]`` on the border."""
    b_i = np.asarray(b_i, dtype=float)
    b_j = np.asarray(b_j, dtype=float)
    hi, hj = border(b_i), border(b_j)
    if classification == "Ic" or (classification is None and hi * hj > 0):
        raise NotAttracting("drift targets lie on the same side of the border")
    if hi == hj:
        return b_i.copy()
    return b_i - (b_i - b_j) * hi / (hi - hj)


def sliding_target_of(rec: AdjacencyRecord, regions: Sequence[RegionVertex]) -> np.ndarray:
    by_id = {r.id: r for r in regions}
    return sliding_target(by_id[rec.v].b, by_id[rec.w].b, rec.border, rec.classification)


@dataclass
class SolutionPiece:
    mode: str  # "interior" | "sliding"
    start: np.ndarray
    target: np.ndarray
    t_start: float
    t_end: float
    region: int | None = None
    pair: tuple[int, int] | None = None

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        decay = np.exp(-(t - self.t_start))
        return self.target + np.multiply.outer(decay, self.start - self.target)

    @property
    def label(self) -> str:
        return str(self.region) if self.mode == "interior" else f"{self.pair[0]}-{self.pair[1]}"


@dataclass
class DISolution:
    pieces: list[SolutionPiece]
    status: str  # "horizon" | "converged" | "corner"
    corner: np.ndarray | None = None
    horizon: float = math.inf

    def piece_at(self, t: float) -> SolutionPiece:
        for p in self.pieces:
            if t <= p.t_end:
                return p
        return self.pieces[-1]

    def at(self, t: float) -> np.ndarray:
        return self.piece_at(t).at(t)

    def sample(self, times: Sequence[float]) -> np.ndarray:
        return np.array([self.at(t) for t in times])

    @property
    def t_stop(self) -> float:
        return self.pieces[-1].t_end if self.pieces else 0.0


def _first_exit(x: np.ndarray, target: np.ndarray, constraints: Sequence[BorderFun]) -> tuple[float, int] | None:
    """Earliest time a constraint (positive inside) vanishes along the flow."""
    best = None
    for i, f in enumerate(constraints):
        fb = f(target)
        if fb >= 0:
            continue
        fx = max(f(x), 0.0)
        tau = math.log((fx - fb) / (-fb))
        if best is None or tau < best[0]:
            best = (tau, i)
    return best


def _active(point: np.ndarray, constraints: Sequence[BorderFun]) -> list[int]:
    return [i for i, f in enumerate(constraints) if abs(f(point)) <= CORNER_TOL]


def solve(
    game: GameSpec,
    regions: Sequence[RegionVertex],
    adjacency: Sequence[AdjacencyRecord],
    start,
    horizon: float,
    max_pieces: int = 10**5,
) -> DISolution:
    """Piecewise-exponential solution from ``start`` on ``[0, horizon]``.

    Stops early at points where more than two regions meet, since no unique
    continuation exists there.
    """
    x = check_aggregate(start, game.n_actions)
    by_id = {r.id: r for r in regions}
    lookup = region_lookup(regions)
    rec_of = {frozenset(r.pair): r for r in adjacency}

    def pair_record(v: int, w: int, theta: int) -> AdjacencyRecord:
        rec = rec_of.get(frozenset((v, w)))
        if rec is not None:
            return rec
        rv, rw = by_id[v], by_id[w]
        h = make_border(game, theta, rv.e[theta], rw.e[theta])
        return AdjacencyRecord(v, w, theta, rv.e[theta], rw.e[theta], h, h(rv.b), h(rw.b), classify_product(h(rv.b) * h(rw.b)))

    prof = profile_at(game, x, CORNER_TOL)
    ties = [t for t, p in enumerate(prof) if len(p) > 1]
    pieces: list[SolutionPiece] = []
    if not ties:
        mode, state = "interior", lookup.get(tuple(p[0] for p in prof))
        if state is None:
            return DISolution([], "corner", x, horizon)
    elif len(ties) == 1 and len(prof[ties[0]]) == 2:
        theta = ties[0]
        base = [p[0] for p in prof]
        a, alt = prof[theta]
        base[theta] = a
        v = lookup.get(tuple(base))
        base[theta] = alt
        w = lookup.get(tuple(base))
        if v is None or w is None:
            return DISolution([], "corner", x, horizon)
        rec = pair_record(v, w, theta)
        if rec.classification == "Ic":
            # enter the side that holds both drift targets
            mode, state = "interior", (rec.v if rec.h_bv > 0 else rec.w)
        else:
            mode, state = "sliding", rec
    else:
        return DISolution([], "corner", x, horizon)

    t = 0.0
    while len(pieces) < max_pieces:
        if mode == "interior":
            rv = by_id[state]
            cons = rv.halfspaces
            ex = _first_exit(x, rv.b, cons)
            if ex is None:
                pieces.append(SolutionPiece("interior", x, rv.b.copy(), t, math.inf, region=rv.id))
                return DISolution(pieces, "converged", None, horizon)
            tau, i = ex
            if t + tau >= horizon:
                pieces.append(SolutionPiece("interior", x, rv.b.copy(), t, horizon, region=rv.id))
                return DISolution(pieces, "horizon", None, horizon)
            hit = rv.b + (x - rv.b) * math.exp(-tau)
            pieces.append(SolutionPiece("interior", x, rv.b.copy(), t, t + tau, region=rv.id))
            t += tau
            if len(_active(hit, cons)) > 1:
                return DISolution(pieces, "corner", hit, horizon)
            f = cons[i]
            e = list(rv.e)
            e[f.theta] = f.a_alt
            w = lookup.get(tuple(e))
            if w is None:
                return DISolution(pieces, "corner", hit, horizon)
            rec = pair_record(rv.id, w, f.theta)
            x = hit
            if rec.classification == "Ic":
                mode, state = "interior", w
            else:
                mode, state = "sliding", rec
        else:
            rec = state
            rv, rw = by_id[rec.v], by_id[rec.w]
            goal = sliding_target(rv.b, rw.b, rec.border, "Istar")
            cons = facet_constraints(rec, by_id)
            ex = _first_exit(x, goal, cons)
            if ex is None:
                pieces.append(SolutionPiece("sliding", x, goal, t, math.inf, pair=rec.pair))
                return DISolution(pieces, "converged", None, horizon)
            tau, _ = ex
            if t + tau >= horizon:
                pieces.append(SolutionPiece("sliding", x, goal, t, horizon, pair=rec.pair))
                return DISolution(pieces, "horizon", None, horizon)
            hit = goal + (x - goal) * math.exp(-tau)
            pieces.append(SolutionPiece("sliding", x, goal, t, t + tau, pair=rec.pair))
            # the facet ends where another border meets it
            return DISolution(pieces, "corner", hit, horizon)
    raise RuntimeError("piece limit reached")


def oracle_integrate(game: GameSpec, start, horizon: float, dt: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step Euler integration of the drift, independent of the region machinery.

    When a step changes some type's best response, the step is split at the
    border crossing (linear interpolation of the utility gap) and finished
    with the drift of the new side.
    """
    if dt > 1e-3:
        raise ValueError("dt must be at most 1e-3")
    cg = CompiledGame(game)
    k = cg.k
    n_steps = int(round(horizon / dt))
    x = [float(v) for v in check_aggregate(start, k)]
    out = np.empty((n_steps + 1, k))
    out[0] = x

    def gaps(theta: int, pt, a: int, alt: int) -> float:
        ua = ub = 0.0
        for act, row, d in cg.rows[theta]:
            if act == a:
                ua = d + sum(c * v for c, v in zip(row, pt))
            elif act == alt:
                ub = d + sum(c * v for c, v in zip(row, pt))
        return ua - ub

    for n in range(n_steps):
        prof = cg.profile(x)
        b = cg.target(x)
        y = [xi + dt * (bi - xi) for xi, bi in zip(x, b)]
        prof_y = cg.profile(y)
        if prof_y != prof:
            frac = 1.0
            for theta in range(cg.n):
                if prof[theta] != prof_y[theta]:
                    a, alt = prof[theta][0], prof_y[theta][0]
                    hx, hy = gaps(theta, x, a, alt), gaps(theta, y, a, alt)
                    if hx != hy:
                        frac = min(frac, max(0.0, min(1.0, hx / (hx - hy))))
            z = [xi + frac * (yi - xi) for xi, yi in zip(x, y)]
            b_new = cg.target(y)
            rest = (1.0 - frac) * dt
            y = [zi + rest * (bi - zi) for zi, bi in zip(z, b_new)]
        x = y
        out[n + 1] = x
    return np.arange(n_steps + 1) * dt, out


# cycle certificates


@dataclass
class CycleCertificate:
    """A closed chain of crossings.

    ``switch_points[i]`` lies on the border between ``region_sequence[i-1]``
    and ``region_sequence[i]`` (cyclically), so the flow in
    ``region_sequence[i]`` carries ``switch_points[i]`` to
    ``switch_points[i+1]`` in time ``switch_times[i]``. The last switch point
    repeats the first.
    """

    region_sequence: list[int]
    switch_points: list[np.ndarray]
    switch_times: list[float]
    closed: bool = True
    degenerate: bool = False

    def __post_init__(self):
        if len(self.region_sequence) <= 2:
            raise ValueError("a cycle certificate needs more than two regions")


@dataclass
class CertificateCheck:
    valid: bool
    residuals: dict = field(default_factory=dict)
    problems: list[str] = field(default_factory=list)


def check_cycle_certificate(
    game: GameSpec, regions: Sequence[RegionVertex], candidate: CycleCertificate, tol: float = 1e-6
) -> CertificateCheck:
    """Re-derive every switch point from the first one and test closure."""
    by_id = {r.id: r for r in regions}
    seq = candidate.region_sequence
    l = len(seq)
    problems = []
    borders = []
    for i in range(l):
        v, w = seq[i], seq[(i + 1) % l]
        rv, rw = by_id[v], by_id[w]
        diff = [t for t in range(game.n_types) if rv.e[t] != rw.e[t]]
        if len(diff) != 1:
            return CertificateCheck(False, {}, [f"regions {v} and {w} differ in {len(diff)} types"])
        theta = diff[0]
        h = make_border(game, theta, rv.e[theta], rw.e[theta])
        borders.append(h)
        if not h(rv.b) * h(rw.b) > 0:
            problems.append(f"border {v}->{w} is not a crossing border")
        if not h(rv.b) < 0:
            problems.append(f"flow in {v} does not head toward {w}")
    x0 = np.asarray(candidate.switch_points[0], dtype=float)
    on_border = abs(borders[-1](x0))
    if on_border > CORNER_TOL:
        problems.append(f"first switch point is off its border by {on_border:.3g}")
    pts = [x0]
    times = []
    in_region = 0.0
    x = x0
    for i in range(l):
        rv = by_id[seq[i]]
        try:
            ex = exit_time(x, rv, borders[i])
        except NoCrossing as err:
            problems.append(f"hop {i}: {err}")
            return CertificateCheck(False, {"closure": math.inf}, problems)
        # the segment stays in the region iff both endpoints are in its closure
        others = [h for h in rv.halfspaces if h.index != borders[i].index]
        in_region = min([in_region] + [h(ex.hit) for h in others] + [h(x) for h in others])
        x = ex.hit
        pts.append(x)
        times.append(ex.tau)
    closure = float(np.max(np.abs(pts[-1] - x0)))
    listed = [np.asarray(p, dtype=float) for p in candidate.switch_points]
    mismatch = max(
        (float(np.max(np.abs(a - b))) for a, b in zip(pts, listed)),
        default=0.0,
    )
    residuals = {
        "closure": closure,
        "switch_point_mismatch": mismatch,
        "region_margin": float(in_region),
        "first_point_border": float(on_border),
    }
    if closure > tol:
        problems.append(f"closure residual {closure:.3g}")
    if mismatch > tol:
        problems.append(f"listed switch points deviate by {mismatch:.3g}")
    if in_region < -CORNER_TOL:
        problems.append(f"path leaves its region by {-in_region:.3g}")
    return CertificateCheck(not problems, residuals, problems)

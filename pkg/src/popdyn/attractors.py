"""Singleton limit candidates: classical rest points and Filippov points.

Every candidate carries convex weights over the drift targets of the regions
that meet at it, from which a per-type equilibrium profile is built and
checked.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from .game import GameSpec, best_response_set, drift, make_border, profile_target
from .lp import LinearProgram, solve
from .regions import (
    AdjacencyRecord,
    RegionVertex,
    enumerate_regions,
    facet_constraints,
    region_lookup,
)

log = logging.getLogger(__name__)

INTERIOR_MARGIN = 1e-9
FACET_MARGIN = -1e-9
DEDUP_DIST = 1e-8
CYCLE_CAP = 10**4


class NotTwoActions(ValueError):
    pass


@dataclass
class Attractor:
    kind: str  # "classical" | "filippov2" | "filippov_higher"
    point: np.ndarray
    support: tuple[int, ...]
    weights: np.ndarray
    profiles: tuple[tuple[int, ...], ...]
    conjectural: bool = False
    one_sided: tuple[float, float] | None = None

    def mfe_profile(self, game: GameSpec) -> np.ndarray:
        """Per-type action distribution: weight of each support profile."""
        mu = np.zeros((game.n_types, game.n_actions))
        for lam, prof in zip(self.weights, self.profiles):
            for theta, a in enumerate(prof):
                mu[theta, a] += lam
        return mu


@dataclass
class MFEVerdict:
    is_mfe: bool
    violations: list[str] = field(default_factory=list)


def verify_mfe(game: GameSpec, attractor: Attractor, tol: float = 1e-8) -> MFEVerdict:
    violations = []
    w = attractor.weights
    if np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-9:
        violations.append(f"weights are not convex: {w.tolist()}")
    mu = attractor.mfe_profile(game)
    for theta in range(game.n_types):
        br = set(best_response_set(game, theta, attractor.point, tol))
        supp = set(int(a) for a in np.flatnonzero(mu[theta] > 1e-12))
        bad = supp - br
        if bad:
            violations.append(f"type {game.type_names[theta]}: actions {sorted(bad)} outside best responses {sorted(br)}")
    agg = game.alpha @ mu
    gap = float(np.max(np.abs(agg - attractor.point)))
    if gap > tol:
        violations.append(f"aggregate mismatch {gap:.3g}")
    return MFEVerdict(not violations, violations)


def classical_attractors(regions: Sequence[RegionVertex]) -> list[Attractor]:
    out = []
    for r in regions:
        if r.contains(r.b, INTERIOR_MARGIN):
            out.append(Attractor("classical", r.b.copy(), (r.id,), np.ones(1), (r.e,)))
    return out


def filippov2_attractors(
    adjacency: Sequence[AdjacencyRecord], regions: Sequence[RegionVertex]
) -> list[Attractor]:
    by_id = {r.id: r for r in regions}
    k = regions[0].b.size if regions else 0
    out = []
    for rec in adjacency:
        if rec.classification != "Istar":
            continue
        lam = abs(rec.h_bw / (rec.h_bv - rec.h_bw))
        rv, rw = by_id[rec.v], by_id[rec.w]
        point = lam * rv.b + (1 - lam) * rw.b
        if all(h(point) >= FACET_MARGIN for h in facet_constraints(rec, by_id)):
            out.append(
                Attractor("filippov2", point, (rec.v, rec.w), np.array([lam, 1 - lam]), (rv.e, rw.e), conjectural=k > 3)
            )
    return out


@dataclass
class CycleScan:
    attractors: list[Attractor]
    complete: bool
    n_cycles: int


def filippov_higher_attractors(
    regions: Sequence[RegionVertex],
    adjacency: Sequence[AdjacencyRecord],
    cap: int = CYCLE_CAP,
) -> CycleScan:
    """Points where three or more regions meet and the drift hull contains 0.

    Cycles are taken in the undirected facet graph. For each one an LP looks
    for weights whose mixed drift target lies on every border of the cycle
    and in the closure of every region on it.
    """
    by_id = {r.id: r for r in regions}
    rec_of = {}
    G = nx.Graph()
    G.add_nodes_from(r.id for r in regions)
    for rec in adjacency:
        G.add_edge(rec.v, rec.w)
        rec_of[frozenset(rec.pair)] = rec
    out = []
    n_cycles = 0
    complete = True
    for cyc in nx.simple_cycles(G):
        if len(cyc) <= 2:
            continue
        n_cycles += 1
        if n_cycles > cap:
            complete = False
            log.warning("cycle cap %d reached; higher-order Filippov scan incomplete", cap)
            break
        att = _cycle_point(cyc, by_id, rec_of)
        if att is not None:
            out.append(att)
    return CycleScan(out, complete, min(n_cycles, cap))


def _cycle_point(cyc, by_id, rec_of) -> Attractor | None:
    l = len(cyc)
    B = np.array([by_id[v].b for v in cyc])
    borders = [rec_of[frozenset((cyc[i], cyc[(i + 1) % l]))].border for i in range(l)]
    k = B.shape[1]
    # the hyperplanes must share a point of the simplex
    A = np.vstack([np.array([h.grad for h in borders]), np.ones(k)])
    rhs = np.append([-h.offset for h in borders], 1.0)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.max(np.abs(A @ sol - rhs)) > 1e-9:
        return None
    eqs = [(np.ones(l), 1.0)] + [(B @ h.grad + h.offset, 0.0) for h in borders]
    ineqs = []
    for v in cyc:
        for h in by_id[v].halfspaces:
            ineqs.append((B @ h.grad + h.offset, 0.0))
    res = solve(LinearProgram(np.zeros(l), eqs, ineqs, [(0.0, 1.0)] * l))
    if res.status != "feasible":
        return None
    lam = np.clip(res.x, 0.0, None)
    lam /= lam.sum()
    keep = lam > 1e-14
    point = lam @ B
    return Attractor(
        "filippov_higher",
        point,
        tuple(v for v, kp in zip(cyc, keep) if kp),
        lam[keep],
        tuple(by_id[v].e for v, kp in zip(cyc, keep) if kp),
    )


def deduplicate(attractors: Sequence[Attractor], dist: float = DEDUP_DIST) -> list[Attractor]:
    out: list[Attractor] = []
    for att in attractors:
        if all(np.max(np.abs(att.point - o.point)) > dist for o in out):
            out.append(att)
    return out


def all_attractors(
    regions: Sequence[RegionVertex], adjacency: Sequence[AdjacencyRecord], cap: int = CYCLE_CAP
) -> tuple[list[Attractor], bool]:
    scan = filippov_higher_attractors(regions, adjacency, cap)
    found = classical_attractors(regions) + filippov2_attractors(adjacency, regions) + scan.attractors
    return deduplicate(found), scan.complete


# two actions


def _scalar_border(game: GameSpec, theta: int) -> tuple[float, float]:
    """Border of a two-action type as ``slope * x + intercept`` in ``x = omega[0]``."""
    h = make_border(game, theta, 0, 1)
    # omega = (x, 1 - x)
    return float(h.grad[0] - h.grad[1]), float(h.grad[1] + h.offset)


def two_action_limits(game: GameSpec, tol: float = 1e-12) -> list[Attractor]:
    """Limit points of the one-dimensional inclusion.

    Rest points inside each interval between borders, plus border points where
    the one-sided drifts have opposite signs (or one vanishes).
    """
    if game.n_actions != 2:
        raise NotTwoActions(f"game has {game.n_actions} actions")
    roots = []
    for theta, acts in enumerate(game.action_sets):
        if len(acts) < 2:
            continue
        slope, icpt = _scalar_border(game, theta)
        if abs(slope) <= tol:
            if abs(icpt) <= tol:
                raise ValueError(f"type {game.type_names[theta]} is indifferent everywhere")
            continue
        x = -icpt / slope
        if -tol <= x <= 1 + tol:
            roots.append(min(max(x, 0.0), 1.0))
    cuts = sorted(set(roots))
    regions = enumerate_regions(game)
    lookup = region_lookup(regions)

    def side_profile(x: float) -> tuple[int, ...]:
        prof = []
        for theta, acts in enumerate(game.action_sets):
            if len(acts) == 1:
                prof.append(acts[0])
            else:
                slope, icpt = _scalar_border(game, theta)
                prof.append(0 if slope * x + icpt > 0 else 1)
        return tuple(prof)

    edges = [0.0] + cuts + [1.0]
    pieces = []  # (lo, hi, profile, target)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= tol:
            continue
        prof = side_profile(0.5 * (lo + hi))
        pieces.append((lo, hi, prof, profile_target(game.alpha, prof, 2)[0]))

    out: list[Attractor] = []
    for i, (lo, hi, prof, b) in enumerate(pieces):
        closed_lo = i == 0 and lo not in cuts
        closed_hi = i == len(pieces) - 1 and hi not in cuts
        inside = (lo < b < hi) or (closed_lo and b == lo) or (closed_hi and b == hi)
        if inside:
            out.append(
                Attractor("classical", np.array([b, 1 - b]), (lookup.get(prof, 0),), np.ones(1), (prof,))
            )
    for x in cuts:
        left = [p for p in pieces if abs(p[1] - x) <= tol]
        right = [p for p in pieces if abs(p[0] - x) <= tol]
        sides = left + right
        limits = [p[3] - x for p in sides]
        if len(sides) == 2:
            g_minus, g_plus = limits
            if min(g_minus, g_plus) <= tol and max(g_minus, g_plus) >= -tol:
                bl, br = left[0][3], right[0][3]
                lam = 1.0 if abs(bl - br) <= tol else (x - br) / (bl - br)
                lam = min(max(lam, 0.0), 1.0)
                out.append(
                    Attractor(
                        "filippov2",
                        np.array([x, 1 - x]),
                        (lookup.get(left[0][2], 0), lookup.get(right[0][2], 0)),
                        np.array([lam, 1 - lam]),
                        (left[0][2], right[0][2]),
                        one_sided=(g_minus, g_plus),
                    )
                )
        elif len(sides) == 1 and abs(limits[0]) <= tol:
            p = sides[0]
            out.append(Attractor("filippov2", np.array([x, 1 - x]), (lookup.get(p[2], 0),), np.ones(1), (p[2],)))
    return deduplicate(sorted(out, key=lambda a: a.point[0]))


def rest_residual(attractor: Attractor, regions: Sequence[RegionVertex]) -> float:
    """``|sum_v weight_v (b_v - point)|``; zero for a genuine rest point of the inclusion."""
    by_id = {r.id: r for r in regions}
    total = np.zeros_like(attractor.point)
    for lam, v in zip(attractor.weights, attractor.support):
        total += lam * (by_id[v].b - attractor.point)
    return float(np.max(np.abs(total)))


def drift_at(game: GameSpec, attractor: Attractor) -> np.ndarray:
    return drift(game, attractor.point)

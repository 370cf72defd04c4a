"""Cycle existence for three-action games through facet-to-facet return maps.

Each border is written in reduced coordinates as a line
``w[p] = eta * w[q] - c`` (with ``w[r] = 1 - w[p] - w[q]`` eliminated), so
the normalized border function is ``w[p] - eta * w[q] + c``. The exponential
flow in a region carries a point of one such line to the next one, and in the
parameter ``x = w[q]`` this hop is a Moebius map. Composing the hops around
a region cycle gives a return map whose fixed points are closed orbits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .disolver import CycleCertificate, NoCrossing, check_cycle_certificate, exit_time
from .game import BorderFun, GameSpec, make_border
from .lp import extreme_value
from .regions import AdjacencyRecord, RegionVertex, facet_constraints
from .rvgraph import RVGraph

MARGIN = 1e-9
SCAN_POINTS = 1000


class NotThreeActions(ValueError):
    pass


class CrossingConditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class ReducedBorder:
    """A facet as ``w[p] = eta * w[q] - c`` for ``w[q]`` in ``[s, e]``.

    ``perm = (p, q, r)``; the default ``(0, 1, 2)`` is the plain layout and
    anything else is flagged as ``swapped``.
    """

    pair: tuple[int, int]
    border: BorderFun
    eta: float
    c: float
    s: float
    e: float
    perm: tuple[int, int, int]
    scale: float  # border = scale * normalized

    @property
    def swapped(self) -> bool:
        return self.perm != (0, 1, 2)

    def lift(self, x: float) -> np.ndarray:
        p, q, r = self.perm
        w = np.zeros(3)
        w[q] = x
        w[p] = self.eta * x - self.c
        w[r] = 1.0 - w[p] - w[q]
        return w

    def param(self, w) -> float:
        return float(np.asarray(w)[self.perm[1]])

    def normalized(self, w) -> float:
        return self.border(w) / self.scale


def _coefficients(h: BorderFun, perm: tuple[int, int, int]) -> tuple[float, float, float]:
    p, q, r = perm
    g, o = h.grad, h.offset
    scale = g[p] - g[r]
    eta = -(g[q] - g[r]) / scale
    c = (g[r] + o) / scale
    return eta, c, scale


def choose_layout(borders: Sequence[BorderFun]) -> tuple[int, int, int]:
    """Coordinate roles keeping every border a graph over the parameter."""
    best, best_val = (0, 1, 2), -1.0
    for perm in itertools.permutations(range(3)):
        p, _, r = perm
        val = min(abs(h.grad[p] - h.grad[r]) for h in borders)
        if val > best_val + 1e-12:
            best, best_val = perm, val
    if best_val <= 1e-12:
        raise ValueError("no coordinate layout represents every border as a graph")
    return best


def reduce(
    game: GameSpec,
    regions: Sequence[RegionVertex],
    records: Sequence[AdjacencyRecord],
    perm: tuple[int, int, int] | None = None,
) -> list[ReducedBorder]:
    """Reduced form and parameter range of each facet."""
    if game.n_actions != 3:
        raise NotThreeActions(f"game has {game.n_actions} actions")
    by_id = {r.id: r for r in regions}
    if perm is None:
        perm = choose_layout([rec.border for rec in records])
    out = []
    for rec in records:
        h = rec.border
        eta, c, scale = _coefficients(h, perm)
        closed = [(f.grad, f.offset) for f in facet_constraints(rec, by_id)]
        unit = np.zeros(3)
        unit[perm[1]] = 1.0
        lo = extreme_value(unit, 3, [(h.grad, h.offset)], closed, maximize=False)
        hi = extreme_value(unit, 3, [(h.grad, h.offset)], closed, maximize=True)
        if lo is None or hi is None:
            raise ValueError(f"facet {rec.pair} is empty")
        out.append(ReducedBorder(rec.pair, h, eta, c, lo, hi, perm, scale))
    return out


@dataclass(frozen=True)
class MobiusMap:
    """``x -> (c1 + c2 x) / (c3 + c4 x)``."""

    coef: tuple[float, float, float, float]

    def __call__(self, x):
        c1, c2, c3, c4 = self.coef
        return (c1 + c2 * np.asarray(x)) / (c3 + c4 * np.asarray(x))

    def denominator(self, x):
        return self.coef[2] + self.coef[3] * np.asarray(x)

    def after(self, inner: "MobiusMap") -> "MobiusMap":
        """``self o inner`` via the coefficient recursion."""
        t1, t2, t3, t4 = self.coef
        p1, p2, p3, p4 = inner.coef
        return MobiusMap((t1 * p3 + t2 * p1, t1 * p4 + t2 * p2, t3 * p3 + t4 * p1, t3 * p4 + t4 * p2))


def hop_map(prev: ReducedBorder, nxt: ReducedBorder, b: np.ndarray) -> MobiusMap:
    """Flow toward ``b`` from the line ``prev`` to the line ``nxt``."""
    b_par = float(b[nxt.perm[1]])
    hb = nxt.normalized(b)
    dc = nxt.c - prev.c
    de = prev.eta - nxt.eta
    return MobiusMap((dc * b_par, de * b_par - hb, dc - hb, de))


@dataclass
class CycleMaps:
    cycle: list[int]
    borders: list[ReducedBorder]  # borders[i] separates cycle[i] and cycle[i+1]
    targets: list[np.ndarray]
    hops: list[MobiusMap]  # hops[i] carries borders[i-1] to borders[i] in cycle[i]
    partial: list[MobiusMap]  # partial[i] = hops[i] o ... o hops[0]

    @property
    def composed(self) -> MobiusMap:
        return self.partial[-1]

    @property
    def entry(self) -> ReducedBorder:
        return self.borders[-1]

    def certificate(self, x: float) -> CycleCertificate:
        point = self.entry.lift(x)
        pts, times = [point], []
        for i, v in enumerate(self.cycle):
            ex = exit_time(point, self.targets[i], self.borders[i].border)
            point = ex.hit
            pts.append(point)
            times.append(ex.tau)
        closure = float(np.max(np.abs(pts[-1] - pts[0])))
        return CycleCertificate(list(self.cycle), pts, times, closed=closure <= 1e-7)


def psi_maps(
    cycle: Sequence[int],
    reduced: Sequence[ReducedBorder],
    regions: Sequence[RegionVertex],
) -> CycleMaps:
    """Per-hop maps and their compositions around ``cycle``.

    ``reduced[i]`` must be the facet between ``cycle[i]`` and ``cycle[i+1]``.
    """
    l = len(cycle)
    if l <= 2:
        raise ValueError("cycle must have more than two regions")
    by_id = {r.id: r for r in regions}
    targets = [by_id[v].b for v in cycle]
    for i in range(l):
        h = reduced[i].border
        src, dst = cycle[i], cycle[(i + 1) % l]
        oriented = h if reduced[i].pair[0] == src else h.negated()
        hv, hw = oriented(by_id[src].b), oriented(by_id[dst].b)
        if not (hv * hw > 0 and hv < 0):
            raise CrossingConditionViolated(f"hop {src}->{dst}: border values {hv:.3g}, {hw:.3g} at the targets")
    hops = [hop_map(reduced[i - 1], reduced[i], targets[i]) for i in range(l)]
    partial = [hops[0]]
    for i in range(1, l):
        partial.append(hops[i].after(partial[-1]))
    return CycleMaps(list(cycle), list(reduced), targets, hops, partial)


@dataclass
class ConditionReport:
    set1_holds: bool
    set2_holds: bool
    details: dict = field(default_factory=dict)


def _interval_checks(m: MobiusMap, xs: Sequence[float], s: float, e: float) -> tuple[list, list]:
    """Cleared-denominator tests ``s*den - num <= 0`` and ``e*den - num >= 0``.

    ``literal`` keeps the raw expressions; ``oriented`` multiplies by the sign
    of the denominator so that the pair is equivalent to ``s <= m(x) <= e``.
    """
    c1, c2, c3, c4 = m.coef
    literal, oriented = [], []
    for x in xs:
        den = c3 + c4 * x
        low = c3 * s + c4 * x * s - c1 - c2 * x
        high = c3 * e + c4 * x * e - c1 - c2 * x
        literal.append((x, low, high))
        sg = 1.0 if den >= 0 else -1.0
        oriented.append((x, sg * low, sg * high, den))
    return literal, oriented


def _holds(rows) -> bool:
    return all(low <= MARGIN and high >= -MARGIN for _, low, high, *rest in rows)


def _pole_free(m: MobiusMap, s: float, e: float) -> bool:
    d0, d1 = m.denominator(s), m.denominator(e)
    return bool(d0 * d1 > 0)


def condition_sets(maps: CycleMaps) -> ConditionReport:
    """Both sufficient families, evaluated at facet endpoints.

    Family 1 asks each hop to map its entry facet into its exit facet; family
    2 asks the same of every partial composition started on the entry facet.
    """
    l = len(maps.cycle)
    fam1, fam2 = [], []
    lit1, lit2 = [], []
    ok1 = ok2 = True
    s0, e0 = maps.entry.s, maps.entry.e
    for i in range(l):
        prev, nxt = maps.borders[i - 1], maps.borders[i]
        lit, ori = _interval_checks(maps.hops[i], (prev.s, prev.e), nxt.s, nxt.e)
        lit1.append(lit)
        fam1.append(ori)
        ok1 = ok1 and _holds(ori) and _pole_free(maps.hops[i], prev.s, prev.e)
        lit, ori = _interval_checks(maps.partial[i], (s0, e0), nxt.s, nxt.e)
        lit2.append(lit)
        fam2.append(ori)
        ok2 = ok2 and _holds(ori) and _pole_free(maps.partial[i], s0, e0)
    details = {
        "set1": fam1,
        "set2": fam2,
        "set1_literal": lit1,
        "set2_literal": lit2,
        "set1_literal_holds": all(low <= MARGIN and high >= -MARGIN for rows in lit1 for _, low, high in rows),
        "set2_literal_holds": all(low <= MARGIN and high >= -MARGIN for rows in lit2 for _, low, high in rows),
    }
    return ConditionReport(ok1, ok2, details)


@dataclass
class FixedPoint:
    x: float | None
    certificate: CycleCertificate | None = None
    degenerate: bool = False
    candidates: list[float] = field(default_factory=list)


def find_fixed_point(
    composed: MobiusMap,
    lo: float,
    hi: float,
    tol: float = 1e-14,
    lift: Callable[[float], CycleCertificate] | None = None,
    accept: Callable[[CycleCertificate], bool] | None = None,
) -> FixedPoint:
    """Roots of ``composed(x) - x`` on ``[lo, hi]`` by scan plus bisection.

    With ``lift`` the first root whose certificate passes ``accept`` is
    returned along with it.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    xs = np.linspace(lo, hi, SCAN_POINTS + 1) if hi > lo else np.array([lo])
    with np.errstate(divide="ignore", invalid="ignore"):
        fx = composed(xs) - xs
        den = composed.denominator(xs)
    if np.all(np.abs(fx[np.isfinite(fx)]) <= 1e-12) and np.all(np.isfinite(fx)):
        cert = lift(float(lo)) if lift else None
        return FixedPoint(float(lo), cert, degenerate=True, candidates=[float(lo)])
    roots = []
    for i in range(xs.size):
        if fx[i] == 0.0:
            roots.append(float(xs[i]))
    for i in range(xs.size - 1):
        a, b = xs[i], xs[i + 1]
        fa, fb = fx[i], fx[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)) or den[i] * den[i + 1] <= 0:
            continue
        if fa * fb < 0:
            while b - a > tol * max(1.0, abs(a)):
                mid = 0.5 * (a + b)
                fm = float(composed(mid) - mid)
                if fm == 0.0:
                    a = b = mid
                    break
                if (fm < 0) == (fa < 0):
                    a, fa = mid, fm
                else:
                    b = mid
            roots.append(0.5 * (a + b))
    roots = sorted(set(roots))
    if not roots:
        return FixedPoint(None)
    if lift is None:
        return FixedPoint(roots[0], candidates=roots)
    for x in roots:
        try:
            cert = lift(x)
        except NoCrossing:
            continue
        if accept is None or accept(cert):
            return FixedPoint(x, cert, candidates=roots)
    return FixedPoint(None, candidates=roots)


@dataclass
class CycleTest:
    cycle: list[int]
    layout: tuple[int, int, int] | None = None
    set1_holds: bool | None = None
    set2_holds: bool | None = None
    fixed_point: float | None = None
    certificate: CycleCertificate | None = None
    certificate_valid: bool = False
    residuals: dict = field(default_factory=dict)
    error: str | None = None


def examine_cycle(
    game: GameSpec,
    regions: Sequence[RegionVertex],
    adjacency: Sequence[AdjacencyRecord],
    cycle: Sequence[int],
) -> tuple[CycleTest, CycleMaps | None]:
    rec_of = {frozenset(r.pair): r for r in adjacency}
    l = len(cycle)
    out = CycleTest(list(cycle))
    try:
        recs = [rec_of[frozenset((cycle[i], cycle[(i + 1) % l]))] for i in range(l)]
        reduced = reduce(game, regions, recs)
        maps = psi_maps(cycle, reduced, regions)
    except (KeyError, ValueError) as err:
        out.error = f"{type(err).__name__}: {err}"
        return out, None
    out.layout = reduced[0].perm
    cond = condition_sets(maps)
    out.set1_holds, out.set2_holds = cond.set1_holds, cond.set2_holds

    def accept(cert: CycleCertificate) -> bool:
        return check_cycle_certificate(game, regions, cert).valid

    fp = find_fixed_point(maps.composed, maps.entry.s, maps.entry.e, lift=maps.certificate, accept=accept)
    out.fixed_point = fp.x
    if fp.certificate is not None:
        chk = check_cycle_certificate(game, regions, fp.certificate)
        out.certificate = fp.certificate
        out.certificate_valid = chk.valid
        out.residuals = chk.residuals
    return out, maps


def run_cycle_tests(
    game: GameSpec,
    regions: Sequence[RegionVertex],
    adjacency: Sequence[AdjacencyRecord],
    graph: RVGraph,
) -> list[CycleTest]:
    if game.n_actions != 3:
        return []
    return [examine_cycle(game, regions, adjacency, cyc)[0] for cyc in graph.cycles]


def flow_hit_param(maps: CycleMaps, hop: int, x: float) -> float:
    """Parameter of the exit point reached by the flow from ``x`` on the entry facet of ``hop``."""
    prev = maps.borders[hop - 1]
    ex = exit_time(prev.lift(x), maps.targets[hop], maps.borders[hop].border)
    return maps.borders[hop].param(ex.hit)

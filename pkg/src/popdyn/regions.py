"""Preference regions, their drift targets and the facets between them."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .game import TIE_TOL, BorderFun, GameSpec, best_response_set, make_border, profile_target
from .lp import FEAS_TOL, max_slack, strict_feasible

MAX_PROFILES = 10**6
PRODUCT_TOL = 1e-12


class CombinatorialBlowup(ValueError):
    pass


@dataclass(frozen=True)
class RegionVertex:
    """Open set where type ``theta`` uniquely prefers ``e[theta]`` for all types.

    ``id`` is a 1-based label assigned in lexicographic order of ``e``.
    """

    id: int
    e: tuple[int, ...]
    b: np.ndarray
    witness: np.ndarray
    halfspaces: tuple[BorderFun, ...]

    def margins(self, omega) -> np.ndarray:
        return np.array([h(omega) for h in self.halfspaces])

    def contains(self, omega, margin: float = 0.0) -> bool:
        return bool(np.all(self.margins(omega) > margin))

    def in_closure(self, omega, tol: float = 1e-9) -> bool:
        return bool(np.all(self.margins(omega) >= -tol))


@dataclass(frozen=True)
class AdjacencyRecord:
    """Two regions whose profiles differ for exactly one type.

    ``border`` is positive on the side of ``v`` (its action ``a`` is preferred
    there) and negative on the side of ``w``.
    """

    v: int
    w: int
    theta: int
    a: int
    a_alt: int
    border: BorderFun
    h_bv: float
    h_bw: float
    classification: str  # "Ic" | "Istar" | "degenerate"

    @property
    def pair(self) -> tuple[int, int]:
        return (self.v, self.w)

    @property
    def product(self) -> float:
        return self.h_bv * self.h_bw

    def oriented(self, source: int) -> BorderFun:
        """The border as seen from region ``source`` (positive inside it)."""
        if source == self.v:
            return self.border
        if source == self.w:
            return self.border.negated()
        raise KeyError(source)

    def other(self, source: int) -> int:
        return self.w if source == self.v else self.v


def region_halfspaces(game: GameSpec, profile: Sequence[int]) -> tuple[BorderFun, ...]:
    out = []
    for theta, a in enumerate(profile):
        for alt in game.action_sets[theta]:
            if alt != a:
                out.append(make_border(game, theta, a, alt))
    return tuple(out)


def classify_product(product: float) -> str:
    if abs(product) <= PRODUCT_TOL:
        return "degenerate"
    return "Ic" if product > 0 else "Istar"


def enumerate_regions(game: GameSpec, eps: float = FEAS_TOL, max_profiles: int = MAX_PROFILES) -> list[RegionVertex]:
    total = math.prod(len(acts) for acts in game.action_sets)
    if total > max_profiles:
        raise CombinatorialBlowup(f"{total} action profiles exceed the limit of {max_profiles}")
    k = game.n_actions
    regions = []
    for profile in itertools.product(*game.action_sets):
        hs = region_halfspaces(game, profile)
        res = strict_feasible([(h.grad, h.offset) for h in hs], k, eps)
        if not res.nonempty:
            continue
        b = profile_target(game.alpha, profile, k)
        regions.append(RegionVertex(len(regions) + 1, tuple(profile), b, res.witness, hs))
    return regions


def drift_targets(regions: Sequence[RegionVertex], alpha, k: int | None = None) -> dict[int, np.ndarray]:
    if k is None:
        k = regions[0].b.size if regions else 0
    return {r.id: profile_target(alpha, r.e, k) for r in regions}


def _facet_rows(rv: RegionVertex, skip: BorderFun) -> list[tuple[np.ndarray, float]]:
    return [(h.grad, h.offset) for h in rv.halfspaces if h.index != skip.index]


def facet_constraints(rec: AdjacencyRecord, by_id: dict[int, RegionVertex]) -> list[BorderFun]:
    """The defining inequalities of both regions other than the shared border."""
    rv, rw = by_id[rec.v], by_id[rec.w]
    mine, theirs = rec.border.index, rec.border.negated().index
    return [h for h in rv.halfspaces if h.index != mine] + [h for h in rw.halfspaces if h.index != theirs]


def adjacency(regions: Sequence[RegionVertex], game: GameSpec, eps: float = FEAS_TOL) -> list[AdjacencyRecord]:
    """Pairs with one changed type that share a full-dimensional facet."""
    k = game.n_actions
    by_id = {r.id: r for r in regions}
    records = []
    for rv, rw in itertools.combinations(regions, 2):
        diff = [t for t in range(game.n_types) if rv.e[t] != rw.e[t]]
        if len(diff) != 1:
            continue
        theta = diff[0]
        h = make_border(game, theta, rv.e[theta], rw.e[theta])
        rec = AdjacencyRecord(rv.id, rw.id, theta, rv.e[theta], rw.e[theta], h, h(rv.b), h(rw.b), "")
        others = [(g.grad, g.offset) for g in facet_constraints(rec, by_id)]
        res = max_slack(others, k, equalities=[(h.grad, h.offset)], interior=True, eps=eps)
        if not res.nonempty:
            continue
        records.append(replace(rec, classification=classify_product(rec.product)))
    return records


def profile_at(game: GameSpec, omega, tie_tol: float = TIE_TOL) -> tuple[tuple[int, ...], ...]:
    return tuple(best_response_set(game, t, omega, tie_tol) for t in range(game.n_types))


def locate(regions: Sequence[RegionVertex], game: GameSpec, omega, tie_tol: float = TIE_TOL) -> int | None:
    """Region id containing ``omega``, or ``None`` on a border."""
    prof = profile_at(game, omega, tie_tol)
    if any(len(p) != 1 for p in prof):
        return None
    e = tuple(p[0] for p in prof)
    for r in regions:
        if r.e == e:
            return r.id
    return None


def region_lookup(regions: Sequence[RegionVertex]) -> dict[tuple[int, ...], int]:
    return {r.e: r.id for r in regions}

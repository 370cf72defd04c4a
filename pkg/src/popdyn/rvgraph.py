"""Directed region graph across non-attracting borders, and its cycles."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from .regions import AdjacencyRecord, RegionVertex

log = logging.getLogger(__name__)

CYCLE_CAP = 10**4


@dataclass
class RVGraph:
    vertices: list[int]
    edges: list[tuple[int, int]]
    cycles: list[list[int]] = field(default_factory=list)
    complete: bool = True
    warnings: list[str] = field(default_factory=list)

    def to_networkx(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(self.vertices)
        G.add_edges_from(self.edges)
        return G

    def successor_map(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in self.vertices}
        for v, w in self.edges:
            out[v].append(w)
        return out


def build(adjacency: Sequence[AdjacencyRecord], regions: Sequence[RegionVertex], reverse: bool = False) -> RVGraph:
    """Edge ``v -> w`` when the flow in ``v`` heads across a crossing border into ``w``.

    With ``reverse=True`` every edge is flipped.
    """
    edges = []
    warnings = []
    for rec in adjacency:
        if rec.classification == "degenerate":
            msg = f"pair {rec.pair} has a drift target on its border; left out of the graph"
            log.warning(msg)
            warnings.append(msg)
            continue
        if rec.classification != "Ic":
            continue
        # h_bv < 0 means the flow in v moves toward w; same sign at b_w for Ic
        edge = (rec.v, rec.w) if rec.h_bv < 0 else (rec.w, rec.v)
        edges.append(edge[::-1] if reverse else edge)
    return RVGraph(sorted(r.id for r in regions), sorted(edges), warnings=warnings)


def canonical_cycle(cycle: Sequence[int]) -> list[int]:
    i = min(range(len(cycle)), key=lambda j: cycle[j])
    return list(cycle[i:]) + list(cycle[:i])


def find_cycles(graph: RVGraph, cap: int = CYCLE_CAP) -> tuple[list[list[int]], bool]:
    """All simple directed cycles up to ``cap``; the flag is ``False`` if truncated."""
    if cap < 1:
        raise ValueError("cap must be positive")
    seen = set()
    cycles = []
    complete = True
    for cyc in nx.simple_cycles(graph.to_networkx()):
        c = canonical_cycle(cyc)
        key = tuple(c)
        if key in seen:
            continue
        if len(cycles) >= cap:
            complete = False
            log.warning("cycle cap %d reached; list incomplete", cap)
            break
        seen.add(key)
        cycles.append(c)
    cycles.sort(key=lambda c: (len(c), c))
    return cycles, complete


def build_with_cycles(
    adjacency: Sequence[AdjacencyRecord], regions: Sequence[RegionVertex], cap: int = CYCLE_CAP, reverse: bool = False
) -> RVGraph:
    g = build(adjacency, regions, reverse)
    g.cycles, g.complete = find_cycles(g, cap)
    return g

"""Full analysis pipeline: regions, facets, limit candidates, region graph, cycle tests."""

from __future__ import annotations

from dataclasses import dataclass, field

from .attractors import (
    CYCLE_CAP,
    Attractor,
    MFEVerdict,
    all_attractors,
    deduplicate,
    two_action_limits,
    verify_mfe,
)
from .cycle3 import CycleTest, run_cycle_tests
from .game import GameSpec
from .regions import AdjacencyRecord, RegionVertex, adjacency, enumerate_regions
from .rvgraph import RVGraph, build_with_cycles


@dataclass
class Analysis:
    game: GameSpec
    regions: list[RegionVertex]
    adjacency: list[AdjacencyRecord]
    attractors: list[Attractor]
    mfe: list[MFEVerdict]
    graph: RVGraph
    cycle_tests: list[CycleTest]
    warnings: list[str] = field(default_factory=list)


def analyze(game: GameSpec, cycle_cap: int = CYCLE_CAP, reverse: bool = False) -> Analysis:
    regions = enumerate_regions(game)
    adj = adjacency(regions, game)
    atts, complete = all_attractors(regions, adj, cycle_cap)
    warnings = []
    if game.n_actions == 2:
        atts = deduplicate(atts + two_action_limits(game))
    if not complete:
        warnings.append(f"higher-order Filippov scan stopped at the cap of {cycle_cap} cycles")
    if any(a.conjectural for a in atts):
        warnings.append("two-region Filippov points with more than three actions are candidates only (conjectural)")
    graph = build_with_cycles(adj, regions, cycle_cap, reverse)
    warnings.extend(graph.warnings)
    if not graph.complete:
        warnings.append(f"region-graph cycle list truncated at {cycle_cap}")
    if not graph.cycles:
        warnings.append(
            "no region-graph cycles: closed crossing chains are ruled out, other cyclic behavior is not"
        )
    tests = run_cycle_tests(game, regions, adj, graph)
    for t in tests:
        if t.error:
            warnings.append(f"cycle {t.cycle}: {t.error}")
    verdicts = [verify_mfe(game, a) for a in atts]
    return Analysis(game, regions, adj, atts, verdicts, graph, tests, warnings)

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import queuing2, queuing3, region_of
from popdyn import analyze, build_with_cycles, enumerate_regions, make_game, prefer_type
from popdyn.rvgraph import RVGraph, build, canonical_cycle, find_cycles


def ids(regions, *profiles):
    return [region_of(regions, p).id for p in profiles]


def test_cm_edges_in_cyclic_case(cyclic2):
    _, an = cyclic2
    r = an.regions
    a, b, c = ids(r, (1, 3), (1, 1), (1, 2))
    assert {(a, b), (b, c), (c, a)} <= set(an.graph.edges)


def test_cycle_present_in_cyclic_case(cyclic2):
    _, an = cyclic2
    r = an.regions
    a, b, c = ids(r, (1, 3), (1, 1), (1, 2))
    assert canonical_cycle([a, b, c]) in an.graph.cycles
    assert an.graph.cycles[0] == [1, 2, 3]


def test_no_back_edge_in_classical_case(classical2):
    _, an = classical2
    r = an.regions
    a, c = ids(r, (1, 3), (1, 2))
    assert (c, a) not in an.graph.edges
    assert an.graph.cycles == []


def test_single_region_no_edges():
    g = make_game([("p", 1.0, [0, 1], prefer_type(2, 0))])
    an = analyze(g)
    assert an.graph.edges == [] and an.graph.cycles == []


def test_three_type_six_cycle():
    g = queuing3(0.2, 0.6, 0.2)
    an = analyze(g)
    r = an.regions
    six = ids(r, (1, 3, 1), (1, 1, 1), (1, 1, 2), (1, 2, 2), (1, 2, 3), (1, 3, 3))
    assert canonical_cycle(six) in an.graph.cycles


def test_reverse_flips_edges(cyclic2):
    _, an = cyclic2
    rev = build(an.adjacency, an.regions, reverse=True)
    assert sorted((w, v) for v, w in an.graph.edges) == rev.edges


def test_degenerate_pairs_excluded_with_warning(classical2):
    _, an = classical2
    assert any("left out of the graph" in w for w in an.graph.warnings)


def test_cap_truncates():
    g = RVGraph([1, 2, 3, 4], [(1, 2), (2, 1), (2, 3), (3, 2), (3, 4), (4, 3), (4, 1), (1, 4)])
    cycles, complete = find_cycles(g, cap=2)
    assert len(cycles) == 2 and not complete
    with pytest.raises(ValueError):
        find_cycles(g, cap=0)


def test_canonical_rotation():
    assert canonical_cycle([3, 1, 2]) == [1, 2, 3]


@settings(max_examples=100, deadline=None)
@given(st.sets(st.tuples(st.integers(1, 6), st.integers(1, 6)).filter(lambda e: e[0] != e[1]), max_size=15))
def test_cycles_are_simple_closed_and_unique(edges):
    g = RVGraph(list(range(1, 7)), sorted(edges))
    cycles, complete = find_cycles(g)
    assert complete
    es = set(edges)
    keys = set()
    for c in cycles:
        assert len(set(c)) == len(c)
        assert c[0] == min(c)
        for i in range(len(c)):
            assert (c[i], c[(i + 1) % len(c)]) in es
        keys.add(tuple(c))
    assert len(keys) == len(cycles)
    assert len(cycles) == sum(1 for _ in nx.simple_cycles(g.to_networkx()))

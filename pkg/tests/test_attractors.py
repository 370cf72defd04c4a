import numpy as np
import pytest

from conftest import queuing2, queuing3
from popdyn import (
    Attractor,
    adjacency,
    all_attractors,
    analyze,
    avoid_type,
    enumerate_regions,
    herd_type,
    make_game,
    prefer_type,
    two_action_limits,
    verify_mfe,
)
from popdyn.attractors import (
    NotTwoActions,
    classical_attractors,
    filippov2_attractors,
    filippov_higher_attractors,
    rest_residual,
)


def test_classical_case(classical2):
    g, an = classical2
    cl = classical_attractors(an.regions)
    assert len(cl) == 1
    assert np.allclose(cl[0].point, [0.5, 0.5, 0.0])


def test_no_classical_below_threshold(filippov2_case):
    _, an = filippov2_case
    assert classical_attractors(an.regions) == []


def test_filippov_two_region_point(filippov2_case):
    _, an = filippov2_case
    f2 = filippov2_attractors(an.adjacency, an.regions)
    assert len(f2) == 1
    assert np.allclose(f2[0].point, [5 / 7, 2 / 7, 0.0], atol=1e-12)
    assert rest_residual(f2[0], an.regions) < 1e-12


def test_no_higher_order_point_at_low_alpha(filippov2_case):
    _, an = filippov2_case
    assert filippov_higher_attractors(an.regions, an.adjacency).attractors == []


def test_higher_order_point_in_cyclic_case(cyclic2):
    _, an = cyclic2
    (att,) = an.attractors
    assert att.kind == "filippov_higher"
    assert np.allclose(att.point, [5 / 12, 1 / 3, 1 / 4], atol=1e-12)
    assert abs(att.weights.sum() - 1) < 1e-12
    assert rest_residual(att, an.regions) < 1e-12


def _symmetric_toy():
    """Two regions on a line with targets at the vertices."""
    g = make_game([("ac", 1.0, [0, 1], avoid_type(2))])
    regions = enumerate_regions(g)
    return g, regions, adjacency(regions, g)


def test_symmetric_toy_midpoint():
    g, regions, adj = _symmetric_toy()
    (att,) = filippov2_attractors(adj, regions)
    assert np.allclose(att.point, [0.5, 0.5])
    assert verify_mfe(g, att).is_mfe


def test_rock_paper_scissors_barycenter():
    # each region's target is a unit vector; the three borders meet at the barycenter
    U = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
    g = make_game([("rps", 1.0, [0, 1, 2], (U, np.zeros(3)))])
    regions = enumerate_regions(g)
    assert len(regions) == 3
    adj = adjacency(regions, g)
    scan = filippov_higher_attractors(regions, adj)
    (att,) = scan.attractors
    assert np.allclose(att.point, [1 / 3] * 3)
    assert np.allclose(att.weights, [1 / 3] * 3)
    assert verify_mfe(g, att).is_mfe


def test_tree_graph_has_no_higher_points():
    # two types with prefer behaviour plus one avoid type on two actions: a path of regions
    g = make_game([("a", 0.6, [0, 1], avoid_type(2)), ("p", 0.4, [0, 1], prefer_type(2, 0))])
    regions = enumerate_regions(g)
    scan = filippov_higher_attractors(regions, adjacency(regions, g))
    assert scan.attractors == [] and scan.complete


def test_higher_order_lp_has_no_solution_on_grid(filippov2_case):
    g, an = filippov2_case
    by = {r.id: r for r in an.regions}
    # brute force over weights on the three cm-only regions
    recs = {frozenset(r.pair): r for r in an.adjacency}
    ids = [r.id for r in an.regions if r.e[0] == 0]
    borders = [recs[frozenset((ids[i], ids[(i + 1) % 3]))].border for i in range(3)]
    B = np.array([by[v].b for v in ids])
    steps = np.linspace(0, 1, 101)
    for l1 in steps:
        for l2 in steps[steps <= 1 - l1 + 1e-12]:
            w = np.array([l1, l2, max(0.0, 1 - l1 - l2)]) @ B
            assert not all(abs(h(w)) <= 1e-6 for h in borders)


def test_two_action_avoid():
    g = make_game([("ac", 1.0, [0, 1], avoid_type(2))])
    (att,) = two_action_limits(g)
    assert np.allclose(att.point, [0.5, 0.5])
    assert att.kind == "filippov2"
    assert att.one_sided == pytest.approx((0.5, -0.5))


def test_two_action_prefer():
    g = make_game([("p", 1.0, [0, 1], prefer_type(2, 0))])
    (att,) = two_action_limits(g)
    assert att.kind == "classical"
    assert np.allclose(att.point, [1.0, 0.0])


def test_two_action_two_prefer_types():
    g = make_game([("p1", 0.3, [0, 1], prefer_type(2, 0)), ("p2", 0.7, [0, 1], prefer_type(2, 1))])
    (att,) = two_action_limits(g)
    assert np.allclose(att.point, [0.3, 0.7])


def test_two_action_herd_limits_include_repelling_border():
    # zero lies between the one-sided drifts at the midpoint even though it repels
    g = make_game([("h", 1.0, [0, 1], herd_type(2))])
    atts = two_action_limits(g)
    assert sorted(a.point[0] for a in atts) == pytest.approx([0.0, 0.5, 1.0])
    mid = [a for a in atts if a.kind == "filippov2"][0]
    assert mid.one_sided == pytest.approx((-0.5, 0.5))


def test_two_action_requires_two_actions():
    with pytest.raises(NotTwoActions):
        two_action_limits(queuing2(0.5))


def test_mfe_of_avoid_midpoint():
    g = make_game([("ac", 1.0, [0, 1], avoid_type(2))])
    (att,) = two_action_limits(g)
    mu = att.mfe_profile(g)
    assert np.allclose(mu, [[0.5, 0.5]])
    assert verify_mfe(g, att).is_mfe


def test_mfe_of_classical_queuing(classical2):
    g, an = classical2
    (att,) = an.attractors
    mu = att.mfe_profile(g)
    assert np.allclose(mu, [[1, 0, 0], [0, 1, 0]])
    assert verify_mfe(g, att).is_mfe


def test_corrupted_attractor_fails_mfe(filippov2_case):
    g, an = filippov2_case
    att = an.attractors[0]
    w = att.weights + np.array([0.1, -0.1])
    bad = Attractor(att.kind, w @ np.array([r.b for r in an.regions if r.id in att.support]), att.support, w, att.profiles)
    v = verify_mfe(g, bad)
    assert not v.is_mfe
    assert any("outside best responses" in s for s in v.violations)


def test_three_type_two_region_point():
    # alpha_ac > alpha_cm and c/(c+2) < alpha_cs < (2-rho)/(2+rho)
    g = queuing3(0.6, 0.1, 0.3)
    atts, complete = all_attractors(*_regions_and_adjacency(g))
    assert complete
    assert any(np.allclose(a.point, [0.6, 0.2, 0.2], atol=1e-9) for a in atts)


def _regions_and_adjacency(g):
    regions = enumerate_regions(g)
    return regions, adjacency(regions, g)


def test_conjectural_flag_for_four_actions():
    g = make_game(
        [
            ("ac", 0.5, [0, 1], avoid_type(4, [0, 1])),
            ("p3", 0.25, [2], prefer_type(4, 2)),
            ("p4", 0.25, [3], prefer_type(4, 3)),
        ]
    )
    an = analyze(g)
    f2 = [a for a in an.attractors if a.kind == "filippov2"]
    assert len(f2) == 1 and f2[0].conjectural
    assert np.allclose(f2[0].point, [0.25] * 4)
    assert any("conjectural" in w for w in an.warnings)
    for a in an.attractors:
        assert verify_mfe(g, a).is_mfe


def test_weights_are_convex_everywhere():
    for alpha in np.linspace(0.05, 0.95, 19):
        an = analyze(queuing2(float(alpha)))
        for a in an.attractors:
            assert np.all(a.weights >= 0) and abs(a.weights.sum() - 1) < 1e-9
            assert rest_residual(a, an.regions) < 1e-8

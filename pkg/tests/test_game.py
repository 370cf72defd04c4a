import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import queuing2, queuing3
from popdyn import (
    GameSpec,
    GameSpecError,
    avoid_type,
    best_response_set,
    border_functions,
    build_queuing_preset,
    drift,
    make_game,
    prefer_type,
    utility,
)
from popdyn.game import ActionNotAvailable, check_aggregate, make_border


def test_cs_utility_queue_one():
    g = queuing2(0.5)
    assert utility(g, 0, 0, [1, 0, 0]) == pytest.approx(-1.0)


def test_cs_skip_is_constant():
    # p + rho != 1 keeps the skip action available
    g = build_queuing_preset(0.4, 0.5, 1.0, 2.0, [0.5, 0.5])
    assert 2 in g.action_sets[0]
    for w in ([1, 0, 0], [0.2, 0.3, 0.5]):
        assert utility(g, 0, 2, w) == pytest.approx(-1.0)


def test_avoid_utility():
    g = make_game([("ac", 1.0, [0, 1], avoid_type(2))])
    assert utility(g, 0, 1, [0.3, 0.7]) == pytest.approx(-0.7)


def test_unavailable_action_raises():
    g = queuing2(0.5)
    with pytest.raises(ActionNotAvailable):
        utility(g, 0, 2, [1, 0, 0])


def test_avoid_tie_at_midpoint():
    g = make_game([("ac", 1.0, [0, 1], avoid_type(2))])
    assert best_response_set(g, 0, [0.5, 0.5], 1e-12) == (0, 1)


def test_cm_best_response_at_vertex():
    g = queuing2(0.5)
    # u = (w3 - w2, w1 - 2 w3, w2 - w1) = (0, 1, -1)
    assert best_response_set(g, 1, [1, 0, 0]) == (1,)


def test_prefer_type_constant_choice():
    g = make_game([("p", 1.0, [0, 1], prefer_type(2, 1))])
    for w in ([1, 0], [0.5, 0.5], [0, 1]):
        assert best_response_set(g, 0, w) == (1,)


def test_border_count_and_formulas():
    g = queuing2(0.5, rho=0.4)
    hs = border_functions(g)
    assert len(hs) == 2 + 6
    cs = [h for h in hs if h.theta == 0 and (h.a, h.a_alt) == (0, 1)][0]
    assert np.allclose(cs.grad, [-1.0, 0.4, 0.0])
    assert cs.offset == pytest.approx(0.6)
    cm = [h for h in hs if h.theta == 1 and (h.a, h.a_alt) == (1, 2)][0]
    assert np.allclose(cm.grad, [2.0, -1.0, -2.0]) and cm.offset == 0.0


def test_single_type_two_borders_antisymmetric():
    g = make_game([("ac", 1.0, [0, 1], avoid_type(2))])
    hs = border_functions(g)
    assert len(hs) == 2
    assert np.allclose(hs[0].grad, -hs[1].grad) and hs[0].offset == -hs[1].offset


def test_avoid_border_three_type_preset():
    g = queuing3(0.3, 0.3, 0.4)
    for a in range(3):
        for alt in range(3):
            if a != alt:
                h = make_border(g, 2, a, alt)
                w = np.array([0.2, 0.5, 0.3])
                assert h(w) == pytest.approx(w[alt] - w[a])


def test_drift_prefer_type():
    g = make_game([("p", 1.0, [0, 1], prefer_type(2, 0))])
    assert np.allclose(drift(g, [0.3, 0.7]), [0.7, -0.7])


def test_drift_avoid_tie_averages():
    g = make_game([("ac", 1.0, [0, 1], avoid_type(2))])
    assert np.allclose(drift(g, [0.5, 0.5]), [0.0, 0.0])


def test_drift_vanishes_at_classical_target():
    g = queuing2(0.5)
    assert np.allclose(drift(g, [0.5, 0.5, 0.0]), 0.0)


def test_alpha_must_sum_to_one():
    with pytest.raises(GameSpecError) as err:
        make_game([("a", 0.5, [0, 1], avoid_type(2))])
    assert err.value.path == "alpha"


def test_action_gaps_rejected():
    U, d = avoid_type(3)
    with pytest.raises(GameSpecError) as err:
        make_game([("a", 1.0, [0, 2], (U, d))])
    assert err.value.path == "actions"


def test_empty_action_set_rejected():
    U, d = avoid_type(2)
    with pytest.raises(GameSpecError):
        GameSpec(("a", "b"), [0.5, 0.5], ((0, 1), ()), [U, U], [d, d])


def test_unavailable_rows_never_read():
    U, d = avoid_type(3)
    U2 = U.copy()
    U2[2] = np.nan
    g = make_game([("a", 0.5, [0, 1, 2], (U, d)), ("b", 0.5, [0, 1], (U2, d))])
    assert np.all(np.isfinite(g.U))
    assert best_response_set(g, 1, [0.2, 0.3, 0.5]) == (0,)


def test_aggregate_clamped():
    w = check_aggregate([1 + 5e-13, -5e-13, 0.0])
    assert w.min() >= 0.0 and w.max() <= 1.0
    with pytest.raises(ValueError):
        check_aggregate([0.5, 0.6])


simplex3 = st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3).map(lambda v: np.array(v) / sum(v))


@settings(max_examples=200, deadline=None)
@given(simplex3)
def test_border_equals_utility_difference(w):
    g = queuing3(0.3, 0.4, 0.3)
    for h in border_functions(g):
        diff = utility(g, h.theta, h.a, w) - utility(g, h.theta, h.a_alt, w)
        assert h(w) == pytest.approx(diff, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(simplex3)
def test_drift_keeps_simplex(w):
    g = queuing3(0.3, 0.4, 0.3)
    v = drift(g, w)
    assert abs(v.sum()) < 1e-12
    assert np.all(w + v >= -1e-12)


@settings(max_examples=200, deadline=None)
@given(simplex3)
def test_best_responses_are_maximizers(w):
    g = queuing3(0.2, 0.5, 0.3)
    for theta in range(g.n_types):
        u = g.utilities(theta, w)
        for a in best_response_set(g, theta, w):
            assert u[a] >= u.max() - 1e-12

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import queuing2, queuing3, region_of
from popdyn import adjacency, enumerate_regions, make_game, prefer_type
from popdyn.regions import CombinatorialBlowup, classify_product, locate, profile_at

TWO_TYPE_PROFILES = {(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)}
THREE_TYPE_PROFILES = {
    (1, 1, 1),
    (1, 1, 2),
    (1, 1, 3),
    (1, 2, 2),
    (1, 2, 3),
    (1, 3, 1),
    (1, 3, 3),
    (2, 1, 2),
    (2, 2, 2),
    (2, 2, 3),
}


def labels(r):
    return tuple(a + 1 for a in r.e)


def test_two_type_regions():
    regions = enumerate_regions(queuing2(0.5))
    assert {labels(r) for r in regions} == TWO_TYPE_PROFILES
    assert [r.id for r in regions] == [1, 2, 3, 4, 5]
    # ids follow lexicographic order of the profiles
    assert [labels(r) for r in regions] == sorted(TWO_TYPE_PROFILES)


def test_three_type_regions():
    regions = enumerate_regions(queuing3(0.3, 0.4, 0.3))
    assert {labels(r) for r in regions} == THREE_TYPE_PROFILES


def test_single_type_single_region():
    g = make_game([("p", 1.0, [0, 1], prefer_type(2, 0))])
    regions = enumerate_regions(g)
    assert len(regions) == 1
    assert np.allclose(regions[0].b, [1.0, 0.0])


def test_witnesses_inside_with_margin():
    for g in (queuing2(0.3), queuing3(0.2, 0.6, 0.2)):
        for r in enumerate_regions(g):
            assert r.margins(r.witness).min() > 1e-9
            assert locate(enumerate_regions(g), g, r.witness) == r.id


def test_drift_targets():
    regions = enumerate_regions(queuing2(0.2))
    assert np.allclose(region_of(regions, (1, 2)).b, [0.8, 0.2, 0.0])
    assert np.allclose(region_of(regions, (2, 2)).b, [0.0, 1.0, 0.0])


def pairs_by_profile(regions, records):
    lab = {r.id: labels(r) for r in regions}
    return {frozenset((lab[rec.v], lab[rec.w])): rec for rec in records}


def test_two_type_adjacency_pairs():
    g = queuing2(0.2)
    regions = enumerate_regions(g)
    recs = pairs_by_profile(regions, adjacency(regions, g))
    expected = {
        frozenset(p)
        for p in [
            ((1, 3), (1, 1)),
            ((1, 1), (1, 2)),
            ((1, 2), (1, 3)),
            ((1, 2), (2, 2)),
            ((2, 2), (2, 1)),
            ((1, 1), (2, 1)),
        ]
    }
    assert set(recs) == expected


def test_classifications():
    g = queuing2(0.2)
    regions = enumerate_regions(g)
    recs = pairs_by_profile(regions, adjacency(regions, g))
    cs_pair = recs[frozenset(((1, 2), (2, 2)))]
    assert cs_pair.classification == "Istar"
    assert cs_pair.product == pytest.approx(-0.12 * 1.0)
    cm_pair = recs[frozenset(((1, 3), (1, 1)))]
    assert cm_pair.classification == "Ic"
    assert cm_pair.product == pytest.approx(1.0)


def test_classify_thresholds():
    assert classify_product(1e-11) == "Ic"
    assert classify_product(-1e-11) == "Istar"
    assert classify_product(5e-13) == "degenerate"


def test_border_orientation():
    g = queuing3(0.2, 0.6, 0.2)
    regions = enumerate_regions(g)
    by_id = {r.id: r for r in regions}
    for rec in adjacency(regions, g):
        assert rec.border(by_id[rec.v].witness) > 0
        assert rec.border(by_id[rec.w].witness) < 0
        assert rec.oriented(rec.w)(by_id[rec.w].witness) > 0


def test_profile_limit():
    with pytest.raises(CombinatorialBlowup):
        enumerate_regions(queuing3(0.2, 0.6, 0.2), max_profiles=5)


simplex3 = st.lists(st.floats(0.001, 1.0), min_size=3, max_size=3).map(lambda v: np.array(v) / sum(v))


@settings(max_examples=300, deadline=None)
@given(simplex3)
def test_every_generic_point_has_a_region(w):
    g = queuing3(0.3, 0.4, 0.3)
    regions = enumerate_regions(g)
    prof = profile_at(g, w, 1e-9)
    v = locate(regions, g, w, 1e-9)
    if all(len(p) == 1 for p in prof):
        assert v is not None
        assert regions[v - 1].contains(w)
    else:
        assert v is None

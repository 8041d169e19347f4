import json
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besovcross.index_sets import (IndexSet, block_band, block_measure, cross_measure, eta,
                                   greedy_select, hyperbolic_cross, index_sets_disjoint, layer)
from besovcross.reports import spread
from besovcross.sampling import axis_levels, make_grid


@pytest.mark.parametrize("t, want", [(0, 0), (0.0, 0), (1, 1), (7, 1), (1e-300, 1)])
def test_eta(t, want):
    assert eta(t) == want


def test_eta_negative():
    with pytest.raises(ValueError):
        eta(-1)


@pytest.mark.parametrize("s, want", [((0, 0), 4), ((3,), 8), ((1, 2), 8), ((0,), 2), ((1,), 2),
                                     ((0, 0, 5), 128)])
def test_block_measure(s, want):
    assert block_measure(s) == want


def test_block_band():
    assert block_band((0, 3)) == [(0.0, 1.0), (4.0, 8.0)]


def test_cross_small():
    got = hyperbolic_cross(2, (1, 1))
    assert got.members == {(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)}
    assert hyperbolic_cross(0, d=1).members == {(0,)}


def test_cross_anisotropic():
    got = hyperbolic_cross(3, (1, 1.5))
    assert all(a + 1.5 * b <= 3 for a, b in got.members)
    assert (0, 2) in got and (1, 2) not in got and (3, 0) in got


def test_cross_rejects_bad_direction():
    with pytest.raises(ValueError):
        hyperbolic_cross(3, (1, 0.5))
    with pytest.raises(ValueError):
        hyperbolic_cross(3, (1, 1), d=3)
    with pytest.raises(ValueError):
        hyperbolic_cross(-1, d=2)


def test_cross_measure_order():
    ratios = [cross_measure(n, d=2) / (2**n * n) for n in range(5, 15)]
    assert spread(ratios) <= 4


def test_cross_measure_bruteforce():
    # count measure directly from per-axis interval lengths
    for n in range(7):
        want = 0
        for a in range(n + 1):
            for b in range(n + 1 - a):
                want += (2 if a == 0 else 2**a) * (2 if b == 0 else 2**b)
        assert cross_measure(n, d=2) == want


def test_layer():
    assert layer(2, 2).members == {(2, 0), (1, 1), (0, 2)}
    assert layer(0, 3).members == {(0, 0, 0)}
    assert layer(3, 3, nu=2).members == {(3, 0, 0), (2, 1, 0), (1, 2, 0), (0, 3, 0)}
    with pytest.raises(ValueError):
        layer(2, 2, nu=3)


@pytest.mark.parametrize("n", range(0, 8))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_layer_cardinality(n, d):
    assert len(layer(n, d)) == comb(n + d - 1, d - 1)


def test_layer_measure_order():
    ratios = [layer(n, 2).total_measure / (2**n * n) for n in range(3, 13)]
    assert spread(ratios) <= 4


def test_nesting_and_disjoint_layers():
    for n in range(8):
        assert hyperbolic_cross(n, d=2).members <= hyperbolic_cross(n + 1, d=2).members
    assert index_sets_disjoint([layer(n, 2) for n in range(8)])
    assert not index_sets_disjoint([layer(2, 2), hyperbolic_cross(2, d=2)])


def test_cross_is_union_of_layers():
    union = IndexSet(2)
    for k in range(6):
        union = union | layer(k, 2)
    assert union == hyperbolic_cross(5, d=2)
    assert union.total_measure == sum(layer(k, 2).total_measure for k in range(6))


def test_blocks_partition_the_lattice():
    g = make_grid(2, 4.0, 64)
    lev = axis_levels(g)
    lam = np.abs(g.axis_frequencies())
    for s in [(0, 0), (1, 3), (4, 2)]:
        band = block_band(s)
        for ax in range(2):
            lo, hi = band[ax]
            inside = (lam >= lo) & (lam < hi)
            assert np.array_equal(inside, lev == s[ax])


def test_json_round_trip():
    a = hyperbolic_cross(4, d=2)
    back = IndexSet.from_json(json.dumps(a.to_json()))
    assert back == a
    bad = a.to_json()
    bad["measure"] += 1
    with pytest.raises(ValueError, match="recorded measure"):
        IndexSet.from_json(bad)


def test_index_set_validation():
    with pytest.raises(ValueError):
        IndexSet(2, frozenset({(1, 2, 3)}))
    with pytest.raises(ValueError):
        IndexSet(1, frozenset({(-1,)}))


def test_greedy_examples():
    assert len(greedy_select({(1, 1): 0.0, (0, 0): 0.0}, 10)) == 0
    assert greedy_select({(3,): 5.0}, 8).members == {(3,)}
    assert greedy_select({(3,): 5.0}, Fraction(15, 2)).members == set()
    with pytest.raises(ValueError):
        greedy_select({(3,): 5.0}, 0)


def test_greedy_order_and_ties():
    scores = {(2,): 4.0, (1,): 2.0, (0,): 2.0, (3,): 1.0}
    # per-measure: (2,) 1.0, (1,) 1.0, (0,) 1.0, (3,) 0.125; ties lexicographic
    assert greedy_select(scores, 2).members == {(0,)}
    assert greedy_select(scores, 4).members == {(0,), (1,)}
    assert greedy_select(scores, 8).members == {(0,), (1,), (2,)}


def test_greedy_stops_at_first_overflow():
    scores = {(5,): 32.0, (0,): 0.5}
    assert greedy_select(scores, 20).members == set()


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)),
                       st.floats(0, 10, allow_nan=False), max_size=20),
       st.fractions(min_value=Fraction(1, 2), max_value=500))
def test_greedy_budget_and_monotone(scores, M):
    a = greedy_select(scores, M, d=2)
    b = greedy_select(scores, M * 2, d=2)
    assert a.total_measure <= M
    assert a.members <= b.members

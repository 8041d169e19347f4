import json
import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from besovcross.approximation import (approximate_hyperbolic, block_scores, error_budgeted,
                                      error_hyperbolic, largest_cross_level, partial_sum,
                                      truncation_residual)
from besovcross.decomposition import apply_sharp_block, sharp_content
from besovcross.extremal import layer_field
from besovcross.index_sets import IndexSet, cross_measure, hyperbolic_cross
from besovcross.sampling import NyquistError, band_limited_noise, filtered, lp_norm, make_grid, zeros


@pytest.fixture
def field(rng):
    g = make_grid(2, 2.0, 64)
    return band_limited_noise(g, 7.0, rng)


def test_partial_sum_plus_residual(field):
    cross = hyperbolic_cross(3, d=2)
    total = partial_sum(field, cross).values + truncation_residual(field, cross).values
    np.testing.assert_allclose(total, field.values, atol=1e-12)


def test_all_blocks_reproduce(field):
    cap = field.grid.level_cap
    every = IndexSet(2, frozenset(product(range(cap + 1), repeat=2)))
    resid = truncation_residual(field, every)
    assert lp_norm(resid, math.inf) < 1e-12 * lp_norm(field, math.inf)


def test_cross_past_nyquist(field):
    with pytest.raises(NyquistError):
        error_hyperbolic(field, 2 * field.grid.level_cap)


def test_partial_sum_is_sum_of_sharp_blocks(field):
    cross = hyperbolic_cross(2, d=2)
    want = sum(apply_sharp_block(field, s).values for s in cross)
    np.testing.assert_allclose(partial_sum(field, cross).values, want, atol=1e-12)


def test_index_set_checks(field):
    with pytest.raises(ValueError):
        partial_sum(field, IndexSet(1, frozenset({(1,)})))


def test_zero_field():
    g = make_grid(1, 4.0, 128)
    assert error_hyperbolic(zeros(g), 2) == 0.0
    res = error_budgeted(zeros(g), 8)
    assert res.error_q == 0.0
    assert res.details["greedy_error"] == 0.0 and res.details["chosen"] == "cross"


def test_largest_cross_level():
    g = make_grid(2, 2.0, 64)
    assert largest_cross_level(g, 3) is None
    assert largest_cross_level(g, 4) == 0
    M = cross_measure(2, d=2)
    assert largest_cross_level(g, M) == 2
    assert largest_cross_level(g, M - 1) == 1


@pytest.mark.parametrize("strategy", ["cross", "greedy", "best"])
def test_budget_respected(field, strategy):
    for M in (4, 10, Fraction(33, 2), 60, 200):
        res = error_budgeted(field, M, 2, strategy)
        assert res.index_set.total_measure <= M
        assert res.budget == Fraction(M)
        assert res.strategy == strategy


def test_best_is_minimum(field):
    for M in (6, 20, 48, 100):
        best = error_budgeted(field, M, math.inf, "best")
        cross = error_budgeted(field, M, math.inf, "cross")
        greedy = error_budgeted(field, M, math.inf, "greedy")
        assert best.error_q == min(cross.error_q, greedy.error_q)
        assert best.error_q <= best.details["cross_error"]


def test_ties_go_to_cross():
    g = make_grid(1, 4.0, 128)
    f = band_limited_noise(g, 0.5, np.random.default_rng(1))
    res = error_budgeted(f, 2, math.inf, "best")
    assert res.details["cross_error"] == res.details["greedy_error"]
    assert res.details["chosen"] == "cross"


def test_l2_error_parseval(field):
    scores = block_scores(field, 2)
    total = lp_norm(field, 2) ** 2
    for M in (8, 30, 90):
        res = error_budgeted(field, M, 2, "greedy", scores=scores)
        kept = sum(scores[s] for s in res.index_set)
        assert res.error_q**2 == pytest.approx(total - kept, rel=1e-9, abs=1e-12 * total)


def test_greedy_l2_monotone(field):
    errs = [error_budgeted(field, M, 2, "greedy").error_q for M in range(2, 260, 6)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))


def test_empty_selection_error_is_norm(field):
    res = error_budgeted(field, 1, math.inf, "greedy")
    assert len(res.index_set) == 0
    assert res.error_q == pytest.approx(lp_norm(field, math.inf))


def test_best_beats_cross_on_layer():
    g = make_grid(2, 4.0, 512)
    f = layer_field(5, g)
    M = cross_measure(4, d=2)
    res = error_budgeted(f, M, math.inf, "best")
    assert res.error_q <= error_hyperbolic(f, 4) * (1 + 1e-12)


def test_approximate_hyperbolic(field):
    res = approximate_hyperbolic(field, 3)
    assert res.error_q == pytest.approx(error_hyperbolic(field, 3), rel=1e-14)
    assert res.budget == cross_measure(3, d=2)
    resid = field.values - res.approximant.values
    assert np.abs(resid).max() == pytest.approx(res.error_q, rel=1e-12)


def test_scores_cover_content(field):
    assert set(block_scores(field, math.inf)) == set(sharp_content(field))


def test_result_json(field):
    res = error_budgeted(field, Fraction(41, 2), math.inf, "best")
    data = json.loads(res.to_json())
    assert data["budget"] == "41/2" and data["q"] == "inf"
    assert IndexSet.from_json(data["index_set"]) == res.index_set


@pytest.mark.parametrize("bad", [dict(M=0), dict(M=-3), dict(M=4, strategy="optimal")])
def test_bad_arguments(field, bad):
    with pytest.raises(ValueError):
        error_budgeted(field, **bad)


def test_l2_orthogonality_and_monotone(field):
    total = lp_norm(field, 2) ** 2
    errs = []
    for n in range(field.grid.level_cap + 1):
        cross = hyperbolic_cross(n, d=2)
        kept = lp_norm(partial_sum(field, cross), 2) ** 2
        err = error_hyperbolic(field, n, q=2)
        assert err**2 + kept == pytest.approx(total, rel=1e-8)
        errs.append(err)
    assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))


def test_partial_sum_idempotent_and_empty(field):
    cross = hyperbolic_cross(3, d=2)
    once = partial_sum(field, cross)
    np.testing.assert_allclose(partial_sum(once, cross).values, once.values, atol=1e-12)
    assert lp_norm(partial_sum(field, IndexSet(2)), math.inf) == 0.0
    np.testing.assert_allclose(partial_sum(field, IndexSet(2, frozenset({(1, 2)}))).values,
                               apply_sharp_block(field, (1, 2)).values, atol=1e-13)


def test_one_dimensional_cross_is_low_pass(rng):
    g = make_grid(1, 8.0, 512)
    f = band_limited_noise(g, 12.0, rng)
    lam = np.abs(g.axis_frequencies())
    low = filtered(f, (lam < 2.0**3).astype(float))
    assert error_hyperbolic(f, 3) == pytest.approx(lp_norm(f - low, math.inf), rel=1e-12)


@pytest.mark.parametrize("strategy", ["cross", "greedy", "best"])
def test_budget_l2_monotone_and_full(field, strategy):
    errs = [error_budgeted(field, M, 2, strategy).error_q for M in (2, 8, 20, 40, 90, 200)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))
    full = IndexSet(2, frozenset(sharp_content(field))).total_measure
    big = error_budgeted(field, 4 * full, math.inf, strategy)
    if strategy == "cross":
        # step crosses within the level cap never cover the corner blocks
        assert big.error_q == error_hyperbolic(field, field.grid.level_cap)
    else:
        assert big.error_q <= 1e-10 * lp_norm(field, math.inf)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from besovcross.kernels import (axis_block_kernel, axis_block_weight, block_kernel_value,
                                block_multiplier_weight, kernel_peak, kernel_time_value,
                                trapezoid_weight)


def quad_kernel(m, t):
    """Oracle: K_m(t) = 2 int_0^{2^m} k_m(lam) cos(2 pi lam t) dlam by adaptive quadrature."""
    top = 1.0 if m == 0 else 2.0**m
    knots = [0.0, top] if m == 0 else [0.0, 2.0 ** (m - 1), top]
    total = 0.0
    for a, b in zip(knots, knots[1:]):
        if t == 0:
            val, _ = integrate.quad(lambda lam: trapezoid_weight(m, lam).item(), a, b)
        else:
            val, _ = integrate.quad(lambda lam: trapezoid_weight(m, lam).item(), a, b,
                                    weight="cos", wvar=2 * math.pi * t)
        total += val
    return 2.0 * total


@pytest.mark.parametrize("m, lam, expected", [
    (0, 0.0, 1.0), (3, 8.0, 0.0), (3, 6.0, 0.5), (0, 0.25, 0.75), (0, 1.0, 0.0),
    (1, 0.5, 1.0), (2, -3.0, 0.5), (5, 100.0, 0.0), (-1, 0.3, 0.0),
])
def test_trapezoid_values(m, lam, expected):
    assert trapezoid_weight(m, lam) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("s, lam, expected", [
    ((0,), 0.0, 1.0), ((2,), 2.0, 1.0), ((1, 1), (1.0, 1.0), 1.0),
    ((2,), 0.5, 0.0), ((3,), 8.0, 0.0), ((1, 0), (1.5, 0.5), 0.5 * 0.5),
])
def test_block_multiplier_values(s, lam, expected):
    assert block_multiplier_weight(s, lam).item() == pytest.approx(expected, abs=1e-15)


def test_block_multiplier_rejects_bad_input():
    with pytest.raises(ValueError):
        block_multiplier_weight((-1,), 0.0)
    with pytest.raises(ValueError):
        block_multiplier_weight((1, 2), [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        trapezoid_weight(-2, 0.0)


@pytest.mark.parametrize("m", [0, 1, 2, 4, 6])
@pytest.mark.parametrize("t", [0.0, 1e-9, 0.013, 0.37, 1.0, 2.5, 7.3])
def test_kernel_matches_quadrature(m, t):
    assert kernel_time_value(m, t) == pytest.approx(quad_kernel(m, t), rel=1e-8, abs=1e-10)


@pytest.mark.parametrize("m", range(1, 12))
def test_kernel_at_origin(m):
    assert kernel_time_value(m, 0.0) == pytest.approx(3 * 2.0 ** (m - 1), rel=1e-15)


def test_series_branch_is_continuous():
    # just inside and outside the series threshold, values agree to rounding
    for m in (0, 3, 10):
        a = 1.0 if m == 0 else 2.0**m
        t0 = 1e-6 / (math.pi * a)
        v = kernel_time_value(m, np.array([t0 * (1 - 1e-9), t0 * (1 + 1e-9)]))
        assert abs(v[0] - v[1]) <= 1e-12 * abs(v[0])


@pytest.mark.parametrize("s", [(0,), (1,), (2,), (5,), (0, 3), (2, 2), (1, 0, 4)])
def test_kernel_peak_is_value_at_origin(s):
    x = np.zeros(len(s))
    assert block_kernel_value(s, x).item() == pytest.approx(kernel_peak(s), rel=1e-14)


def test_kernel_peak_is_maximum():
    t = np.linspace(-4, 4, 20001)
    for s in range(6):
        v = np.abs(axis_block_kernel(s, t))
        assert v.max() <= kernel_peak((s,)) * (1 + 1e-12)


def test_block_kernel_is_tensor_product():
    x = np.array([[0.1, -0.3], [1.7, 0.02]])
    got = block_kernel_value((2, 3), x)
    want = axis_block_kernel(2, x[:, 0]) * axis_block_kernel(3, x[:, 1])
    np.testing.assert_allclose(got, want, rtol=1e-14)


lams = st.floats(min_value=-2.0**15, max_value=2.0**15, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(lam=lams, S=st.integers(min_value=0, max_value=14))
def test_telescoping(lam, S):
    total = sum(axis_block_weight(s, lam) for s in range(S + 1))
    assert abs(total - trapezoid_weight(S, lam)) <= 1e-14


@settings(max_examples=200, deadline=None)
@given(lam=lams, m=st.integers(min_value=0, max_value=14))
def test_even_and_bounded(lam, m):
    w = trapezoid_weight(m, lam)
    assert w == trapezoid_weight(m, -lam)
    assert 0.0 <= w <= 1.0
    a = axis_block_weight(m, lam)
    assert 0.0 <= a <= 1.0


@settings(max_examples=200, deadline=None)
@given(lam=lams, s=st.integers(min_value=0, max_value=14))
def test_block_support(lam, s):
    a = axis_block_weight(s, lam)
    if abs(lam) > 2.0**s or (s >= 2 and abs(lam) < 2.0 ** (s - 2)):
        assert a == 0.0


@settings(max_examples=100, deadline=None)
@given(t=st.floats(min_value=-50, max_value=50, allow_nan=False), m=st.integers(0, 10))
def test_kernel_even(t, m):
    assert kernel_time_value(m, t) == kernel_time_value(m, -t)

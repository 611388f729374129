from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knvertex.errors import InsufficientPrecision
from knvertex.series import (
    MINUS,
    PLUS,
    BiSeries,
    LaurentSeries,
    LocalForm,
    lie_derivative,
    residue,
    ser_add,
    ser_diff,
    ser_mul,
    ser_scale,
)

L = LaurentSeries


def form(coeffs, v, n=None, weight=0, point=PLUS):
    return LocalForm(L(coeffs, v, n), weight, point)


def test_product_example():
    a = L({-1: 1, 0: 1}, -1, 3)
    b = L({1: 1}, 1, 5)
    c = ser_mul(a, b)
    assert c.window == (0, 4)
    assert c.coeffs == {0: 1, 1: 1}


def test_product_with_zero_keeps_window():
    a = L({-1: 1, 0: 1}, -1, 3)
    c = ser_mul(a, L.zero(0, 4))
    assert c.coeffs == {}
    assert c.window == (-1, 3)


def test_geometric_times_one_minus_z():
    geo = L({k: 1 for k in range(6)}, 0, 6)
    c = geo * L({0: 1, 1: -1}, 0)
    assert c.window == (0, 6)
    assert c.coeffs == {0: 1}


def test_add_and_scale():
    a = L({0: 1}, 0, 3)
    b = L({-1: 2}, -1, 5)
    s = ser_add(a, b)
    assert s.window == (-1, 3)
    assert s.coeffs == {-1: 2, 0: 1}
    assert ser_scale(Fraction(1, 2), b).coeffs == {-1: 1}


def test_untrusted_coefficient_raises():
    a = L({0: 1}, 0, 3)
    assert a.coeff(-5) == 0
    with pytest.raises(InsufficientPrecision):
        a.coeff(3)


def test_mixed_points_rejected():
    with pytest.raises(ValueError):
        form({0: 1}, 0, point=PLUS) + form({0: 1}, 0, point=MINUS)
    with pytest.raises(ValueError):
        form({0: 1}, 0, point=PLUS) * form({0: 1}, 0, point=MINUS)
    with pytest.raises(ValueError):
        LocalForm(L.zero(), 0, "*")


def test_d_examples():
    assert ser_diff(form({3: 1}, 3)).series.coeffs == {2: 3}
    assert ser_diff(form({3: 1}, 3)).weight == 1
    assert ser_diff(form({0: 7}, 0)).series.coeffs == {}
    assert ser_diff(form({-1: 1}, -1)).series.coeffs == {-2: -1}
    with pytest.raises(ValueError):
        ser_diff(form({0: 1}, 0, weight=1))


def test_residue_examples():
    assert residue(form({-1: 1}, -1, weight=1)) == 1
    assert residue(form({-2: 1}, -2, weight=1)) == 0
    with pytest.raises(InsufficientPrecision):
        residue(form({-3: 1}, -3, -1, weight=1))
    with pytest.raises(ValueError):
        residue(form({-1: 1}, -1, weight=0))


@pytest.mark.parametrize("n", [-3, -1, 0, 1, 2, 5])
def test_lie_derivative_examples(n):
    d = form({0: 1}, 0, weight=-1)
    f = lie_derivative(form({n: 1}, n), d)
    assert f.series.coeffs == ({n - 1: n} if n else {})
    w = lie_derivative(form({-n - 1: 1}, -n - 1, weight=1), d)
    assert w.series.coeffs == ({-n - 2: -n - 1} if n != -1 else {})
    assert w.weight == 1


def test_lie_derivative_needs_vector_field():
    with pytest.raises(ValueError):
        lie_derivative(form({0: 1}, 0), form({0: 1}, 0, weight=0))


def test_empty_lie_window_raises():
    with pytest.raises(InsufficientPrecision):
        lie_derivative(form({}, 0, 0), form({0: 1}, 0, 1, weight=-1))


def test_json_roundtrip():
    a = L({-1: Fraction(1, 3), 2: 5}, -1, 4)
    assert L.from_json(a.to_json()) == a
    with pytest.raises(ValueError):
        L.from_json({"valuation": 0, "precision": 3, "coeffs": ["1"]})


# ---------------------------------------------------------------------------
# properties, against a dense brute-force convolution


@st.composite
def series(draw, exact=False):
    v = draw(st.integers(-4, 3))
    length = draw(st.integers(1, 6))
    coeffs = draw(st.lists(st.integers(-5, 5), min_size=length, max_size=length))
    n = None if exact else v + length
    return L({v + i: Fraction(c) for i, c in enumerate(coeffs)}, v, n)


def brute_product(a, b):
    lo = a.valuation + b.valuation
    hi = min(a.precision + b.valuation, b.precision + a.valuation)
    dense = {}
    for k in range(lo, hi):
        total = Fraction(0)
        for i in range(a.valuation, a.precision):
            j = k - i
            if b.valuation <= j < b.precision:
                total += a.coeff(i) * b.coeff(j)
        if total:
            dense[k] = total
    return dense, (lo, hi)


@settings(max_examples=100, deadline=None)
@given(series(), series())
def test_product_matches_brute_force(a, b):
    dense, window = brute_product(a, b)
    c = a * b
    assert c.window == window
    assert c.coeffs == dense


@settings(max_examples=100, deadline=None)
@given(series(), series(), series())
def test_ring_laws_on_common_window(a, b, c):
    assert ((a * b) * c).agrees(a * (b * c))
    assert (a * (b + c)).agrees(a * b + a * c)
    assert (a * b) == (b * a)


@settings(max_examples=100, deadline=None)
@given(series(), series())
def test_leibniz(a, b):
    assert (a * b).derivative().agrees(a.derivative() * b + a * b.derivative())


@settings(max_examples=100, deadline=None)
@given(series(exact=True))
def test_exact_differentials_have_no_residue(a):
    assert residue(ser_diff(LocalForm(a, 0))) == 0


# ---------------------------------------------------------------------------
# two variables


def test_outer_and_residue():
    f = L({-1: 2, 0: 1}, -1, 3)
    g = L({0: 1, 1: 4}, 0, 2)
    bi = BiSeries.outer(f, g)
    assert bi.coeff(-1, 1) == 8
    r = bi.residue_x()
    assert r.coeffs == {0: 2, 1: 8}
    assert bi.residue_y().coeffs == {}
    with pytest.raises(InsufficientPrecision):
        bi.coeff(3, 0)


def test_bi_derivatives_match_univariate():
    f = L({-2: 1, 1: 3}, -2, 4)
    g = L({0: 5, 2: 1}, 0, 3)
    bi = BiSeries.outer(f, g)
    assert bi.diff_x().agrees(BiSeries.outer(f.derivative(), g))
    assert bi.diff_y().agrees(BiSeries.outer(f, g.derivative()))
    h = L({1: 1, 2: -1}, 1, 4)
    assert bi.mul_x(h).agrees(BiSeries.outer(f * h, g))
    assert bi.mul_y(h).agrees(BiSeries.outer(f, g * h))


def test_bi_lower_bound_violation():
    with pytest.raises(ValueError):
        BiSeries({(0, 0): 1}, vx=1)

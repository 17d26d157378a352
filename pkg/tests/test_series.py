from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dsegrowth.series import (
    BivariateSeries,
    InsufficientLaurentOrder,
    LaurentData,
    PoleAtOrigin,
    RationalSeries,
    ZeroConstantTerm,
    format_fraction,
    generalized_binomial,
    laurent_from_poles,
    laurent_geometric,
    series_add,
    series_mul,
    series_pow,
    to_fraction,
    x_ddx,
)

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def series_st(n):
    return st.lists(fracs, min_size=n + 1, max_size=n + 1).map(RationalSeries)


def S(*c, N=None):
    return RationalSeries(c, N)


def test_add_examples():
    assert series_add(S(1, 1), S(1, -1)) == S(2, 0)
    f = S(1, 2, 3)
    assert series_add(RationalSeries.zero(2), f) == f
    assert series_add(S(0, 1, 1), S(0, 0, 1)) == S(0, 1, 2)


def test_mul_examples():
    assert series_mul(S(1, 1, 0), S(1, -1, 0)) == S(1, 0, -1)
    assert series_mul(S(0, 1, 0), S(0, 1, 0)) == S(0, 0, 1)
    assert series_mul(S(1, 1), S(1, 1)) == S(1, 2)


def test_binary_ops_use_min_truncation():
    assert (S(1, 1, 1) + S(1, 1)).truncation == 1
    assert (S(1, 1, 1) * S(1, 1)).truncation == 1


def test_pow_examples():
    assert series_pow(S(1, 1, 0, 0), -1) == S(1, -1, 1, -1)
    assert series_pow(S(3, 5, 7), 0) == S(1, 0, 0)
    assert series_pow(S(1, -1, 0), -2) == S(1, 2, 3)


def test_pow_negative_needs_constant_term():
    with pytest.raises(ZeroConstantTerm):
        series_pow(S(0, 1, 2), -1)


def test_x_ddx_examples():
    assert x_ddx(S(0, 0, 1)) == S(0, 0, 2)
    assert x_ddx(S(5, 0)) == S(0, 0)
    assert x_ddx(S(0, 1, 0, 4)) == S(0, 1, 0, 12)


def test_laurent_geometric_examples():
    assert laurent_geometric(1, 2).coeffs == (1, 1, 1, 1)
    assert laurent_geometric(0, 3).is_zero()
    assert laurent_geometric(Fraction(-1, 6), 1).coeffs == (Fraction(-1, 6),) * 3


def test_laurent_from_poles_examples():
    F = laurent_from_poles(-1, [1, 2, 3], 4)
    assert F.f(-1) == Fraction(-1, 6)
    assert F.f(0) == Fraction(-11, 36)
    assert laurent_from_poles(1, [1], 5).coeffs == (1,) * 7
    with pytest.raises(PoleAtOrigin):
        laurent_from_poles(1, [1, 0], 3)


def test_laurent_order_errors():
    F = LaurentData([1, 2, 3])
    assert F.order == 1
    assert F.f(-2) == 0
    with pytest.raises(InsufficientLaurentOrder):
        F.f(2)
    with pytest.raises(InsufficientLaurentOrder):
        F.truncate(3)


def test_rational_formatting():
    assert format_fraction(Fraction(-10, 4)) == "-5/2"
    assert format_fraction(Fraction(6, 3)) == "2"
    assert to_fraction(" 3/9 ") == Fraction(1, 3)
    with pytest.raises(TypeError):
        to_fraction(0.5)
    with pytest.raises(TypeError):
        to_fraction(True)
    assert S("1/2", "-2/4").to_json() == ["1/2", "-1/2"]
    assert RationalSeries.from_json(["1/2", "3"]) == S(Fraction(1, 2), 3)


def test_generalized_binomial_negative_exponent():
    # (1 + t)^-3 = 1 - 3t + 6t^2 - 10t^3
    assert [generalized_binomial(-3, m) for m in range(4)] == [1, -3, 6, -10]
    assert [generalized_binomial(2, m) for m in range(4)] == [1, 2, 1, 0]


def test_bivariate_triangular():
    B = BivariateSeries.from_rows([[0], [0, 1], [0, 2, 3]])
    assert B[2, 1] == 2 and B[1, 2] == 0
    with pytest.raises(ValueError):
        BivariateSeries.from_rows([[0, 1]])


@settings(max_examples=60, deadline=None)
@given(series_st(5), series_st(5), series_st(5))
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a + (-a) == RationalSeries.zero(5)
    assert all(isinstance(x, Fraction) for x in (a * b).coeffs)


@settings(max_examples=60, deadline=None)
@given(series_st(6))
def test_reciprocal_inverts(a):
    if a[0] == 0:
        with pytest.raises(ZeroConstantTerm):
            a.reciprocal()
        return
    assert a.reciprocal() * a == RationalSeries.one(6)
    assert series_pow(a, -2) * a * a == RationalSeries.one(6)


@settings(max_examples=40, deadline=None)
@given(fracs.filter(bool), st.lists(fracs.filter(bool), min_size=1, max_size=4), st.integers(0, 6))
def test_laurent_from_poles_round_trip(scale, poles, M):
    F = laurent_from_poles(scale, poles, M)
    # rho F(rho) * prod(p_i - rho) == scale + O(rho^(M+2))
    acc = RationalSeries(F.coeffs)
    for p in poles:
        acc = acc * RationalSeries([p, -1] + [0] * M)
    assert acc == RationalSeries([scale], M + 1)

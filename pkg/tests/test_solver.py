from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dsegrowth.recursions import first_recursion
from dsegrowth.series import InsufficientLaurentOrder, LaurentData, laurent_from_poles, laurent_geometric
from dsegrowth.solver import (
    CONVENTIONS,
    GammaTable,
    TheorySpec,
    kernel_phi,
    rhs_residual,
    solve_single,
    solve_system,
)

from conftest import laurent_st, random_single_spec


def padded(poly, n):
    return list(poly) + [Fraction(0)] * (n - len(poly))


def test_kernel_phi_examples():
    pole = LaurentData([1, 0, 0])
    assert padded(kernel_phi(pole, 0), 2) == [0, -1]
    assert padded(kernel_phi(pole, 1), 3) == [0, 0, Fraction(-1, 2)]
    F = LaurentData([Fraction(3, 7), 5, -2])
    assert padded(kernel_phi(F, 0), 2) == [0, Fraction(-3, 7)]


def test_kernel_phi_needs_laurent_order():
    with pytest.raises(InsufficientLaurentOrder):
        kernel_phi(LaurentData([1, 1]), 3)


@settings(max_examples=40, deadline=None)
@given(laurent_st(4), st.integers(0, 4))
def test_kernel_phi_formula(F, m):
    # (-1)^m m! sum_u ((-L)^u / u!) f_{m-u}
    from math import factorial

    poly = padded(kernel_phi(F, m), m + 2)
    assert poly[0] == 0
    for u in range(1, m + 2):
        assert poly[u] == (-1) ** m * factorial(m) * Fraction((-1) ** u, factorial(u)) * F.f(m - u)


def test_yukawa_kernel_gives_known_anomalous_dimension():
    # F = -1/(rho (1 - rho)), i.e. f_{-1} = -1 so that gamma_{1,1} = -f_{-1} = 1
    spec = TheorySpec.single(2, {1: laurent_geometric(-1, 6)}, 6)
    t = solve_single(spec)
    assert [t.get("r", 1, j) for j in range(1, 7)] == [1, 1, 4, 27, 248, 2830]
    # positive residue flips the odd orders
    t2 = solve_single(TheorySpec.single(2, {1: laurent_geometric(1, 4)}, 4))
    assert [t2.get("r", 1, j) for j in range(1, 5)] == [-1, 1, -4, 27]


def test_zero_mellin_gives_zero_table():
    spec = TheorySpec.single(3, {1: LaurentData([0] * 7), 2: LaurentData([0] * 7)}, 5)
    assert solve_single(spec) == GammaTable.zeros(("r",), 5)


def test_spec_validation():
    with pytest.raises(ValueError):
        TheorySpec.single(0, {1: laurent_geometric(1, 3)}, 3)
    with pytest.raises(ValueError):
        TheorySpec.single(1, {1: laurent_geometric(1, 3)}, 3, convention="bogus")
    with pytest.raises(InsufficientLaurentOrder):
        solve_single(TheorySpec.single(2, {1: LaurentData([1, 1, 1])}, 4))


def test_solve_single_rejects_systems():
    spec = TheorySpec(("a", "b"), {"a": 1, "b": 1}, {"a": {}, "b": {}}, 2)
    with pytest.raises(ValueError):
        solve_single(spec)


def test_gamma_table_csv():
    t = solve_single(TheorySpec.single(2, {1: laurent_geometric(-1, 2)}, 2))
    assert t.to_csv() == "residue,k,j,value\nr,1,1,1\nr,1,2,1\nr,2,2,-1/2\n"


@pytest.mark.parametrize("convention", CONVENTIONS)
@pytest.mark.parametrize("s", [-2, -1, 1, 2, 3])
def test_triangular_and_self_consistent(convention, s):
    spec = random_single_spec(random.Random(s * 7 + len(convention)), s, 6, convention=convention)
    t = solve_single(spec)
    for k in range(1, 7):
        for j in range(1, k):
            assert t.get("r", k, j) == 0
    residual = rhs_residual(spec, t)
    assert all(v == 0 for row in residual["r"] for v in row)


def test_residual_detects_wrong_table():
    spec = TheorySpec.single(2, {1: laurent_geometric(-1, 4)}, 4)
    t = solve_single(spec)
    t.values["r"][1][3] += 1
    assert any(v for row in rhs_residual(spec, t)["r"] for v in row)


@settings(max_examples=15, deadline=None)
@given(laurent_st(5), laurent_st(5), st.sampled_from([-2, -1, 1, 2, 3]))
def test_first_recursion_consistency(F1, F2, s):
    spec = TheorySpec.single(s, {1: F1, 2: F2}, 5)
    t = solve_single(spec)
    assert first_recursion({"r": t.gamma1()}, {"r": s}) == t


def test_rho_convention_breaks_first_recursion():
    spec = TheorySpec.single(2, {1: laurent_from_poles(-1, [1, 2, 3], 5)}, 5, convention="rho")
    t = solve_single(spec)
    assert first_recursion({"r": t.gamma1()}, {"r": 2}) != t


@settings(max_examples=15, deadline=None)
@given(laurent_st(5), st.sampled_from([-2, -1, 1, 2]))
def test_literal_is_mirror_of_rg(F, s):
    a = solve_single(TheorySpec.single(s, {1: F}, 5, convention="rg"))
    b = solve_single(TheorySpec.single(s, {1: F}, 5, convention="literal"))
    for k in range(1, 6):
        for n in range(k, 6):
            assert b.get("r", k, n) == (-1) ** (n + 1) * a.get("r", k, n)


def test_single_residue_system_matches_single():
    F = laurent_from_poles(-1, [1, 2, 3], 5)
    single = solve_single(TheorySpec.single(2, {1: F}, 5, residue="phi"))
    system = solve_system(TheorySpec(("phi",), {"phi": 2}, {"phi": {1: [F]}}, 5))
    assert single == system


def test_multiple_primitives_per_order_add():
    F, G = LaurentData([1, 2, 3, 4, 5, 6]), LaurentData([-2, 1, 0, 1, 0, 1])
    two = solve_single(TheorySpec.single(1, {1: [F, G]}, 4))
    one = solve_single(TheorySpec.single(1, {1: F + G}, 4))
    assert two == one


def test_symmetric_system_gives_equal_residues():
    F = LaurentData([Fraction(-1, 2), 1, 2, 0, 1, 1, 1])
    spec = TheorySpec(("a", "b"), {"a": 2, "b": 2}, {"a": {1: [F]}, "b": {1: [F]}}, 5)
    t = solve_system(spec)
    assert t.values["a"] == t.values["b"]
    residual = rhs_residual(spec, t)
    assert all(v == 0 for r in ("a", "b") for row in residual[r] for v in row)


def test_system_first_recursion():
    rng = random.Random(11)
    prims = {r: {1: [LaurentData([Fraction(rng.randint(-3, 3), 2) for _ in range(7)])],
                 2: [LaurentData([Fraction(rng.randint(0, 3)) for _ in range(7)])]} for r in "abc"}
    s = {"a": 2, "b": -1, "c": 1}
    t = solve_system(TheorySpec(tuple("abc"), s, prims, 5))
    assert first_recursion({r: t.gamma1(r) for r in "abc"}, s) == t


@settings(max_examples=10, deadline=None)
@given(st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=5), laurent_st(5))
def test_m_degree_homogeneity(lam, F):
    # f_j -> lam^(j+1) f_j scales gamma_{k,j} by lam^(j-k)
    base = solve_single(TheorySpec.single(2, {1: F}, 5))
    scaled_F = LaurentData([lam ** (j + 1) * F.f(j) for j in range(-1, F.order + 1)])
    scaled = solve_single(TheorySpec.single(2, {1: scaled_F}, 5))
    for k in range(1, 6):
        for j in range(k, 6):
            assert scaled.get("r", k, j) == lam ** (j - k) * base.get("r", k, j)
    # f_j -> lam^j f_j is the rho rescaling and only scales by lam^(-k)
    rho_F = LaurentData([lam ** j * F.f(j) for j in range(-1, F.order + 1)])
    rho_scaled = solve_single(TheorySpec.single(2, {1: rho_F}, 5))
    for k in range(1, 6):
        for j in range(k, 6):
            assert rho_scaled.get("r", k, j) == lam ** (-k) * base.get("r", k, j)

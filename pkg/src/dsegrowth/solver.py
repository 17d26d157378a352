"""Order-by-order expansion of the analytic Dyson-Schwinger equation.

For each residue r the equation reads

    gamma^r . L = sum_k x^k  prod_j (1 - sign(s_j) gamma^j . d)^{e_j(k)}
                                 (exp(-L rho) - 1) F_{k;r}(rho) |_{rho=0}

with ``d = d/d(-rho)``, ``e_r(k) = 1 - s_r k`` and ``e_j(k) = -s_j k`` for
j != r.  Operators are power series in x whose coefficients are polynomials
in ``d``; because gamma_k starts at x**k the ``d``-degree of any x**n
coefficient is at most n, and the x**n coefficient of the right-hand side
only involves gamma coefficients of lower x-order.

Three sign conventions for the operator are supported (``convention``):

``"rg"`` (default)
    ``(1 + sign(s) gamma . d)^e``.  Solutions satisfy the first and second
    recursions exactly.
``"rho"``
    ``(1 - sign(s) gamma . d/drho)^e``.  Reproduces the reference reduction
    tables for the phi^3 kernel, but its solutions do not satisfy the first
    recursion.
``"literal"``
    ``(1 - sign(s) gamma . d)^e``.  Equivalent to ``"rg"`` under x -> -x,
    gamma_k(x) -> -gamma_k(-x).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence

from .series import (
    InsufficientLaurentOrder,
    LaurentData,
    RationalSeries,
    format_fraction,
    generalized_binomial,
    poly_add_into,
    poly_mul,
)


CONVENTIONS = ("rg", "rho", "literal")


def sign(s: int) -> int:
    return 1 if s >= 0 else -1


def _operator_weight(convention: str, s: int, i: int) -> int:
    """Multiplier of gamma_i d^i inside the base operator ``1 - D``."""
    sg = sign(s)
    if convention == "rg":
        return -sg
    if convention == "rho":
        return sg * (-1) ** i
    if convention == "literal":
        return sg
    raise ValueError(f"unknown operator convention {convention!r}; expected one of {CONVENTIONS}")


@dataclass(frozen=True)
class KernelTerm:
    """One Mellin kernel: ``L**lpow * F(rho)`` with F given by Laurent data."""

    laurent: LaurentData
    lpow: int = 0


@dataclass
class TheorySpec:
    residues: tuple[str, ...]
    s: dict[str, int]
    primitives: dict[str, dict[int, list[LaurentData]]]
    truncation: int
    convention: str = "rg"

    def __post_init__(self):
        self.residues = tuple(self.residues)
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown operator convention {self.convention!r}")
        for r in self.residues:
            if self.s.get(r, 0) == 0:
                raise ValueError(f"residue {r!r}: s must be a nonzero integer")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")

    @classmethod
    def single(cls, s: int, primitives: Mapping[int, Sequence[LaurentData] | LaurentData], truncation: int,
               residue: str = "r", convention: str = "rg") -> TheorySpec:
        prims = {}
        for k, v in primitives.items():
            prims[int(k)] = [v] if isinstance(v, LaurentData) else list(v)
        return cls((residue,), {residue: s}, {residue: prims}, truncation, convention)

    def kernels(self) -> dict[str, dict[int, list[KernelTerm]]]:
        out: dict[str, dict[int, list[KernelTerm]]] = {}
        for r in self.residues:
            per_k: dict[int, list[KernelTerm]] = {}
            for k, items in self.primitives.get(r, {}).items():
                if not items:
                    continue
                total = items[0]
                for extra in items[1:]:
                    total = total + extra
                per_k[int(k)] = [KernelTerm(total)]
            out[r] = per_k
        return out


@dataclass
class GammaTable:
    """gamma^r_{k,j} for 1 <= k <= j <= N, stored as ``values[r][k][j]``."""

    residues: tuple[str, ...]
    truncation: int
    values: dict[str, list[list[Fraction]]] = field(default_factory=dict)

    @classmethod
    def zeros(cls, residues: Sequence[str], truncation: int) -> GammaTable:
        n = truncation
        vals = {r: [[Fraction(0)] * (n + 1) for _ in range(n + 1)] for r in residues}
        return cls(tuple(residues), truncation, vals)

    def get(self, r: str, k: int, j: int) -> Fraction:
        if k < 1 or j < 1 or k > self.truncation or j > self.truncation:
            return Fraction(0)
        return self.values[r][k][j]

    def series(self, r: str, k: int) -> RationalSeries:
        """gamma^r_k(x) as a series truncated at x**N."""
        return RationalSeries([self.get(r, k, j) for j in range(self.truncation + 1)])

    def gamma1(self, r: str | None = None) -> RationalSeries:
        return self.series(r if r is not None else self.residues[0], 1)

    def __eq__(self, other):
        if not isinstance(other, GammaTable):
            return NotImplemented
        if self.residues != other.residues or self.truncation != other.truncation:
            return False
        return all(self.values[r] == other.values[r] for r in self.residues)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["residue", "k", "j", "value"])
        for r in self.residues:
            for k in range(1, self.truncation + 1):
                for j in range(k, self.truncation + 1):
                    w.writerow([r, k, j, format_fraction(self.values[r][k][j])])
        return buf.getvalue()


def kernel_phi(F: LaurentData, m: int, maxL: int | None = None) -> list[Fraction]:
    """``d^m/d(-rho)^m [(exp(-L rho) - 1) F(rho)]`` at rho = 0 as L-coefficients.

    Equals ``(-1)^m m! sum_{u=1}^{m+1} (-L)^u / u! f_{m-u}``; index i of the
    returned list is the coefficient of L**i (the constant term is zero).
    """
    if m - 1 > F.order:
        raise InsufficientLaurentOrder(
            f"derivative order {m} needs f_{m - 1}, data stops at f_{F.order}"
        )
    top = m + 1 if maxL is None else min(m + 1, maxL)
    out = [Fraction(0)] * (top + 1)
    pref = (-1) ** m * factorial(m)
    for u in range(1, top + 1):
        out[u] = Fraction(pref * (-1) ** u, factorial(u)) * F.f(m - u)
    return out


class _Rows:
    """Rows of an x-series computed on first access, in order."""

    __slots__ = ("_rows", "_rule")

    def __init__(self, rule: Callable[[int], list[Fraction]]):
        self._rows: list[list[Fraction]] = []
        self._rule = rule

    def __getitem__(self, t: int) -> list[Fraction]:
        rows = self._rows
        while len(rows) <= t:
            rows.append(self._rule(len(rows)))
        return rows[t]


def _cauchy_rule(a: _Rows, b: _Rows) -> Callable[[int], list[Fraction]]:
    def rule(t: int) -> list[Fraction]:
        acc: list[Fraction] = []
        for i in range(t + 1):
            ai = a[i]
            if not ai:
                continue
            bi = b[t - i]
            if bi:
                poly_add_into(acc, poly_mul(ai, bi))
        return acc

    return rule


class Expansion:
    """Shared machinery: operator rows built from a (possibly growing) gamma table.

    ``gamma`` must already hold every coefficient of x-order < n before
    :meth:`rhs` is called for order n.
    """

    def __init__(self, residues: Sequence[str], s: Mapping[str, int],
                 kernels: Mapping[str, Mapping[int, Sequence[KernelTerm]]], gamma: GammaTable,
                 convention: str = "rg"):
        self.residues = tuple(residues)
        self.convention = convention
        self.s = dict(s)
        self.kernels = {r: {int(k): list(v) for k, v in kernels.get(r, {}).items()} for r in self.residues}
        self.gamma = gamma
        self._dpow: dict[str, list[_Rows]] = {r: [] for r in self.residues}
        self._d: dict[str, _Rows] = {r: _Rows(self._d_rule(r)) for r in self.residues}
        self._factor: dict[tuple[str, int], _Rows] = {}
        self._op: dict[tuple[str, int], _Rows] = {}
        self._phi: dict[tuple[int, int], list[Fraction]] = {}

    def _d_rule(self, r: str):
        w = [0] + [_operator_weight(self.convention, self.s[r], i) for i in range(1, self.gamma.truncation + 1)]
        vals = self.gamma.values[r]

        def rule(t: int) -> list[Fraction]:
            if t == 0:
                return []
            return [Fraction(0)] + [w[i] * vals[i][t] for i in range(1, t + 1)]

        return rule

    def _d_power(self, r: str, m: int) -> _Rows:
        pows = self._dpow[r]
        while len(pows) <= m:
            q = len(pows)
            if q == 0:
                pows.append(_Rows(lambda t: [Fraction(1)] if t == 0 else []))
            elif q == 1:
                pows.append(self._d[r])
            else:
                prev = pows[q - 1]
                pows.append(_Rows(_cauchy_rule(self._d[r], prev)))
        return pows[m]

    def _factor_rows(self, r: str, e: int) -> _Rows:
        """Rows of (1 - D_r)**e via the terminating binomial expansion.

        D_r is stored with the convention's weights already applied, so the
        factor is always ``sum_m binom(e, m) (-D_r)**m``.
        """
        key = (r, e)
        if key not in self._factor:
            def rule(t: int) -> list[Fraction]:
                acc: list[Fraction] = []
                for m in range(t + 1):
                    c = generalized_binomial(e, m) * (-1) ** m
                    if c == 0:
                        continue
                    row = self._d_power(r, m)[t]
                    if row:
                        poly_add_into(acc, row, c)
                return acc

            self._factor[key] = _Rows(rule)
        return self._factor[key]

    def operator(self, r: str, k: int) -> _Rows:
        key = (r, k)
        if key not in self._op:
            rows = self._factor_rows(r, 1 - self.s[r] * k)
            for j in self.residues:
                if j == r:
                    continue
                e = -self.s[j] * k
                if e == 0:
                    continue
                rows = _Rows(_cauchy_rule(rows, self._factor_rows(j, e)))
            self._op[key] = rows
        return self._op[key]

    def _phi_of(self, term: KernelTerm, m: int) -> list[Fraction]:
        key = (id(term), m)
        cached = self._phi.get(key)
        if cached is None:
            base = kernel_phi(term.laurent, m)
            cached = [Fraction(0)] * term.lpow + base if term.lpow else base
            self._phi[key] = cached
        return cached

    def rhs(self, r: str, n: int, *, skip_k: int | None = None) -> list[Fraction]:
        """L-coefficients of [x^n] of the right-hand side for residue r."""
        acc: list[Fraction] = []
        for k, terms in self.kernels[r].items():
            if k > n or k == skip_k or not terms:
                continue
            row = self.operator(r, k)[n - k]
            for m, c in enumerate(row):
                if not c:
                    continue
                for term in terms:
                    poly_add_into(acc, self._phi_of(term, m), c)
        return acc


def _solve(residues, s, kernels, truncation, convention) -> GammaTable:
    table = GammaTable.zeros(residues, truncation)
    eng = Expansion(residues, s, kernels, table, convention)
    for n in range(1, truncation + 1):
        orders = {r: eng.rhs(r, n) for r in residues}
        for r, coeffs in orders.items():
            if coeffs and coeffs[0]:
                raise AssertionError("L**0 term must vanish after subtraction")
            for ell in range(1, len(coeffs)):
                if ell > n:
                    if coeffs[ell]:
                        raise AssertionError(f"L**{ell} term at x**{n} violates triangularity")
                    continue
                table.values[r][ell][n] = coeffs[ell]
    return table


def solve_system(spec: TheorySpec) -> GammaTable:
    return _solve(spec.residues, spec.s, spec.kernels(), spec.truncation, spec.convention)


def solve_single(spec: TheorySpec) -> GammaTable:
    if len(spec.residues) != 1:
        raise ValueError("solve_single expects exactly one residue")
    return solve_system(spec)


def solve_kernels(residues: Sequence[str], s: Mapping[str, int],
                  kernels: Mapping[str, Mapping[int, Sequence[KernelTerm]]], truncation: int,
                  convention: str = "rg") -> GammaTable:
    """Solve with arbitrary kernel terms (used to re-solve reduced equations)."""
    return _solve(tuple(residues), s, kernels, truncation, convention)


def rhs_residual(spec: TheorySpec, table: GammaTable) -> dict[str, list[list[Fraction]]]:
    """gamma . L minus the right-hand side evaluated on ``table``, per x-order.

    Zero everywhere (exactly) when ``table`` solves ``spec``.
    """
    eng = Expansion(spec.residues, spec.s, spec.kernels(), table, spec.convention)
    out: dict[str, list[list[Fraction]]] = {}
    for r in spec.residues:
        rows = []
        for n in range(1, spec.truncation + 1):
            rhs = eng.rhs(r, n)
            lhs = [Fraction(0)] + [table.get(r, ell, n) for ell in range(1, n + 1)]
            size = max(len(lhs), len(rhs))
            lhs += [Fraction(0)] * (size - len(lhs))
            rhs = rhs + [Fraction(0)] * (size - len(rhs))
            rows.append([a - b for a, b in zip(lhs, rhs)])
        out[r] = rows
    return out

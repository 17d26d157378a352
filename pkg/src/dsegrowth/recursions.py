"""Recursions for the anomalous dimensions.

* first recursion:  gamma^r_k = (1/k) (sign(s_r) gamma^r_1 - sum_j |s_j| gamma^j_1 x d/dx) gamma^r_{k-1}
* second recursion: gamma^r_{1,n} = p^r(n) + sum_i (|s_r| i - sign(s_r)) gamma^r_{1,i} gamma^r_{1,n-i}
                                   + sum_{j != r} sum_i |s_j| i gamma^j_{1,n-i} gamma^r_{1,i}

The second recursion is written generically over the number type, so it runs
on Fractions (exact tables) or floats (long radius runs) alike.  Each p^r may
be a plain sequence or a callable ``p(n, gamma)`` receiving the coefficients
computed so far; the latter allows primitives tuned against the solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence, Union

from .reduce import ReductionResult
from .series import RationalSeries
from .solver import GammaTable, TheorySpec, sign, solve_single

# p(n, gamma) -> value, where gamma[r][i] is known for 1 <= i < n
PCallable = Callable[[int, Mapping[str, Sequence]], object]
PInput = Union[Sequence, PCallable]


@dataclass
class PrimitiveSeries:
    """p_r(k) for k = 1..N; ``values[r][k - 1]`` is p_r(k)."""

    residues: tuple[str, ...]
    values: dict[str, list] = field(default_factory=dict)
    provenance: str = "direct"

    def __post_init__(self):
        self.residues = tuple(self.residues)
        if self.provenance not in ("direct", "reduction"):
            raise ValueError("provenance must be 'direct' or 'reduction'")

    @classmethod
    def single(cls, values: Sequence, residue: str = "r") -> PrimitiveSeries:
        return cls((residue,), {residue: list(values)})

    def __getitem__(self, r: str) -> list:
        return self.values[r]

    @property
    def length(self) -> int:
        return min(len(v) for v in self.values.values()) if self.values else 0


def p_from_reduction(red: ReductionResult) -> PrimitiveSeries:
    """p_r(k) = -r_k - 2 r_{k,1}  (r_{1,1} taken as 0)."""
    vals = {}
    for r in red.residues:
        vals[r] = [-red.rki(r, k, 0) - 2 * red.rki(r, k, 1) for k in range(1, red.truncation + 1)]
    return PrimitiveSeries(red.residues, vals, provenance="reduction")


def _p_value(p: PInput, n: int, gamma: Mapping[str, Sequence]):
    if callable(p):
        return p(n, gamma)
    return p[n - 1] if n - 1 < len(p) else 0


def second_recursion_coefficients(p: Mapping[str, PInput], s: Mapping[str, int], N: int,
                                  zero=Fraction(0)) -> dict[str, list]:
    """gamma^r_{1,n} for n = 0..N (index 0 is always zero), any number type."""
    residues = list(p)
    g: dict[str, list] = {r: [zero] * (N + 1) for r in residues}
    for n in range(1, N + 1):
        new = {}
        for r in residues:
            sr = s[r]
            acc = _p_value(p[r], n, g)
            gr = g[r]
            for i in range(1, n):
                acc += (abs(sr) * i - sign(sr)) * gr[i] * gr[n - i]
            for j in residues:
                if j == r:
                    continue
                gj = g[j]
                sj = abs(s[j])
                for i in range(1, n):
                    acc += sj * i * gj[n - i] * gr[i]
            new[r] = acc
        # the order-n values of the other residues never enter order n
        for r in residues:
            g[r][n] = new[r]
    return g


def _as_inputs(p: PrimitiveSeries | Mapping[str, PInput]) -> dict[str, PInput]:
    if isinstance(p, PrimitiveSeries):
        return {r: p.values[r] for r in p.residues}
    return dict(p)


def second_recursion_system(p: PrimitiveSeries | Mapping[str, PInput], s: Mapping[str, int],
                            N: int | None = None) -> dict[str, RationalSeries]:
    inputs = _as_inputs(p)
    if N is None:
        if not isinstance(p, PrimitiveSeries):
            raise ValueError("N is required when p is given as callables")
        N = p.length
    for r in inputs:
        if s.get(r, 0) == 0:
            raise ValueError(f"residue {r!r}: s must be a nonzero integer")
    g = second_recursion_coefficients(inputs, s, N)
    return {r: RationalSeries(v) for r, v in g.items()}


def second_recursion_single(p: PrimitiveSeries | PInput, s: int, N: int | None = None) -> RationalSeries:
    if isinstance(p, PrimitiveSeries):
        if len(p.residues) != 1:
            raise ValueError("expected a single-residue primitive series")
        r = p.residues[0]
        return second_recursion_system(p, {r: s}, N)[r]
    if N is None:
        if callable(p):
            raise ValueError("N is required when p is a callable")
        N = len(p)
    return second_recursion_system({"r": p}, {"r": s}, N)["r"]


def first_recursion(gamma1: Mapping[str, RationalSeries], s: Mapping[str, int], K: int | None = None) -> GammaTable:
    """Full table gamma^r_{k,j} rebuilt from the gamma_1 series alone."""
    residues = tuple(gamma1)
    N = min(g.truncation for g in gamma1.values())
    K = N if K is None else K
    if K > N:
        raise ValueError(f"K={K} exceeds the truncation {N}")
    table = GammaTable.zeros(residues, N)
    # beta-like factor sum_j |s_j| gamma^j_1
    beta = RationalSeries.zero(N)
    for j in residues:
        beta = beta + gamma1[j].scale(abs(s[j]))
    for r in residues:
        g1 = gamma1[r].truncate(N)
        prev = g1
        table.values[r][1] = list(g1.coeffs)
        for k in range(2, K + 1):
            cur = (g1 * prev).scale(sign(s[r])) - beta * prev.x_ddx()
            prev = cur.scale(Fraction(1, k))
            table.values[r][k] = list(prev.coeffs)
    return table


def polynomial_kernel_relation(c, q: Sequence, table: GammaTable, residue: str | None = None) -> RationalSeries:
    """Defect of the linear relation implied by ``rho F(rho) Q(rho) = c``.

    For a single one-loop primitive with s arbitrary, ``gamma_l = x O(rho**l F)``
    up to the factor ``(-1)**l / l!`` for any operator O, so
    ``sum_i q_i (-1)**(i+1) (i+1)! gamma_{i+1} = c x``.  Returns left minus
    right side (identically zero when the relation holds).
    """
    r = residue if residue is not None else table.residues[0]
    N = table.truncation
    acc = RationalSeries.monomial(1, N, -Fraction(c))
    for i, qi in enumerate(q):
        qi = Fraction(qi)
        if qi and i + 1 <= N:
            acc = acc + table.series(r, i + 1).scale(qi * (-1) ** (i + 1) * factorial(i + 1))
    return acc


# (1 - rho)(2 - rho)(3 - rho) = 6 - 11 rho + 6 rho**2 - rho**3
PHI3_Q = (6, -11, 6, -1)


def phi3_fourth_order_check(spec: TheorySpec, table: GammaTable | None = None) -> bool:
    """gamma_1 == x/6 - (11/3) gamma_2 - 6 gamma_3 - 4 gamma_4 to the truncation order.

    The relation is specific to F(rho) = -1/(rho (1-rho)(2-rho)(3-rho)) with a
    single one-loop primitive.
    """
    if table is None:
        table = solve_single(spec)
    defect = polynomial_kernel_relation(-1, PHI3_Q, table)
    return not any(defect.coeffs)


def degenerate_system_p(a1: Fraction = Fraction(1), p1: Sequence | None = None) -> dict[str, PInput]:
    """Primitives of the two-residue system (s_1 = 2, s_2 = -1) tuned so that
    gamma^2_1 collapses to a single term.

    Residue "2" gets p(1) = a1, p(2) = -4 a1**2 and
    p(n) = -2 gamma^2_{1,1} gamma^1_{1,n-1} for n >= 3, which depends on the
    solution and is therefore a callable.  Residue "1" gets ``p1`` (defaults
    to p(1) = a1 and nothing else); its first entry must equal a1.
    """
    a1 = Fraction(a1)
    if p1 is None:
        p1 = [a1]
    if Fraction(p1[0]) != a1:
        raise ValueError("the tuning requires p^1(1) == p^2(1)")

    def p2(n: int, g: Mapping[str, Sequence]):
        if n == 1:
            return a1
        if n == 2:
            return -4 * a1 * a1
        return -2 * g["2"][1] * g["1"][n - 1]

    return {"1": list(p1), "2": p2}


DEGENERATE_S = {"1": 2, "2": -1}

"""Reduction of arbitrary Mellin data to geometric-series kernels.

Every loop order k (up to the truncation) receives the replacement kernel

    r_k / (rho (1 - rho))  +  sum_{i=1}^{k-1} r_{k,i} L**i / rho

and the constants are fixed, order by order, so that the reduced equation
has exactly the same solution as the original one.  At order x**n the new
unknowns only enter through their leading contributions ``-r_n L`` and
``-r_{n,i} L**(i+1)``, so each step is a direct read-off of the mismatch.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .series import LaurentData, format_fraction, laurent_geometric
from .solver import Expansion, GammaTable, KernelTerm, TheorySpec, solve_kernels, solve_system


def _pure_pole(c: Fraction, order: int) -> LaurentData:
    """c / rho, padded with zeros up to f_order."""
    return LaurentData([c] + [0] * (order + 1))


@dataclass
class ReductionResult:
    """``r[res][k]`` is r_k; ``r_mixed[res][(k, i)]`` is r_{k,i} for 1 <= i < k."""

    residues: tuple[str, ...]
    truncation: int
    r: dict[str, dict[int, Fraction]] = field(default_factory=dict)
    r_mixed: dict[str, dict[tuple[int, int], Fraction]] = field(default_factory=dict)
    convention: str = "rg"

    def rk(self, res: str, k: int) -> Fraction:
        return self.r[res][k]

    def rki(self, res: str, k: int, i: int) -> Fraction:
        if i == 0:
            return self.r[res][k]
        if not 1 <= i < k:
            return Fraction(0)
        return self.r_mixed[res][(k, i)]

    def kernels(self) -> dict[str, dict[int, list[KernelTerm]]]:
        """Geometric kernels realising this result (used to re-solve)."""
        n = self.truncation
        out: dict[str, dict[int, list[KernelTerm]]] = {}
        for res in self.residues:
            per_k = {}
            for k in range(1, n + 1):
                terms = [KernelTerm(laurent_geometric(self.r[res][k], n))]
                for i in range(1, k):
                    terms.append(KernelTerm(_pure_pole(self.r_mixed[res][(k, i)], n), i))
                per_k[k] = terms
            out[res] = per_k
        return out

    def rows(self):
        for res in self.residues:
            for k in range(1, self.truncation + 1):
                yield res, k, 0, self.r[res][k]
                for i in range(1, k):
                    yield res, k, i, self.r_mixed[res][(k, i)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["residue", "k", "i", "value"])
        for res, k, i, v in self.rows():
            w.writerow([res, k, i, format_fraction(v)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "truncation": self.truncation,
            "convention": self.convention,
            "residues": {
                res: {
                    "r": {str(k): format_fraction(v) for k, v in sorted(self.r[res].items())},
                    "r_mixed": {f"{k},{i}": format_fraction(v)
                                for (k, i), v in sorted(self.r_mixed[res].items())},
                }
                for res in self.residues
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def reduce_system(spec: TheorySpec, target: GammaTable | None = None) -> ReductionResult:
    """Unique geometric-kernel constants reproducing the solution of ``spec``."""
    n_max = spec.truncation
    if target is None:
        target = solve_system(spec)
    kernels: dict[str, dict[int, list[KernelTerm]]] = {r: {} for r in spec.residues}
    eng = Expansion(spec.residues, spec.s, kernels, target, spec.convention)
    out = ReductionResult(spec.residues, n_max, {r: {} for r in spec.residues},
                          {r: {} for r in spec.residues}, spec.convention)
    for n in range(1, n_max + 1):
        for res in spec.residues:
            # every other kernel at order <= n is already known; the order-n
            # kernel itself only contributes its leading term here
            cur = eng.rhs(res, n, skip_k=n)
            mismatch = [target.get(res, ell, n) - (cur[ell] if ell < len(cur) else 0)
                        for ell in range(n + 1)]
            if len(cur) > n + 1 and any(cur[n + 1:]):
                raise AssertionError(f"reduced right-hand side not triangular at x**{n}")
            rn = -mismatch[1]
            out.r[res][n] = rn
            terms = [KernelTerm(laurent_geometric(rn, n_max))]
            for i in range(1, n):
                v = -mismatch[i + 1]
                out.r_mixed[res][(n, i)] = v
                terms.append(KernelTerm(_pure_pole(v, n_max), i))
            eng.kernels[res][n] = terms
    return out


def reduce_single(spec: TheorySpec) -> ReductionResult:
    if len(spec.residues) != 1:
        raise ValueError("reduce_single expects exactly one residue")
    return reduce_system(spec)


def verify_reduction(spec: TheorySpec, result: ReductionResult) -> bool:
    """Re-solve with the reduced kernels and compare with the original solution."""
    original = solve_system(spec)
    reduced = solve_kernels(spec.residues, spec.s, result.kernels(), spec.truncation, spec.convention)
    return original == reduced

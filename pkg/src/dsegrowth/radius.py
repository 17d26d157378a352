"""Radius of convergence of A(x) = sum_n gamma_{1,n} x^n / n!.

Estimates come from a Domb-Sykes fit: the ratios a_n / a_{n-1} are regressed
linearly against 1/n over the tail half of the data and the intercept is the
reciprocal radius.  The closed-form prediction is

    min over r of { rho_r , 1 / sum_j |s_j| a^j_1 }

where rho_r is the radius of f_r(x) = sum_k p_r(k) x^k / k!.  For mixed-sign
primitives only a lower bound is available (the denominator is then taken in
absolute value).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .series import RationalSeries

INF = math.inf
MIN_TERMS = 10


class InsufficientTerms(ValueError):
    """Raised when too few nonzero coefficients are available for a fit."""


def _coeff_list(gamma1: RationalSeries | Sequence) -> list[Fraction]:
    coeffs = list(gamma1.coeffs) if isinstance(gamma1, RationalSeries) else list(gamma1)
    return [Fraction(c) for c in coeffs]


def borel_coefficients_exact(gamma1: RationalSeries | Sequence) -> list[Fraction]:
    """a_n = gamma_{1,n} / n! for n = 1..N (exact); index 0 of the input is ignored."""
    coeffs = _coeff_list(gamma1)
    out = []
    fact = 1
    for n in range(1, len(coeffs)):
        fact *= n
        out.append(coeffs[n] / fact)
    return out


def borel_coefficients(gamma1: RationalSeries | Sequence) -> np.ndarray:
    """a_n as floats for n = 1..N; entry i holds a_{i+1}."""
    return np.array([float(a) for a in borel_coefficients_exact(gamma1)], dtype=float)


@dataclass
class RadiusEstimate:
    radius: float
    intercept: float
    slope: float
    ratios: list[float] = field(default_factory=list)
    infinite: bool = False
    negative_coefficients: bool = False


def estimate_radius(a: Sequence[float], tail_fraction: float = 0.5) -> RadiusEstimate:
    """Domb-Sykes estimate from a_1..a_N (``a[i]`` is a_{i+1})."""
    arr = np.asarray(a, dtype=float)
    negative = bool(np.any(arr < 0))
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        return RadiusEstimate(INF, 0.0, 0.0, [], infinite=True, negative_coefficients=negative)
    last = int(nz[-1])
    if last < arr.size - 1 and nz.size < MIN_TERMS:
        # finitely many nonzero terms followed by zeros: a polynomial
        return RadiusEstimate(INF, 0.0, 0.0, [], infinite=True, negative_coefficients=negative)
    if nz.size < MIN_TERMS:
        raise InsufficientTerms(f"need at least {MIN_TERMS} nonzero terms, got {nz.size}")
    if last < arr.size - 1:
        # a long series whose tail vanishes: also treated as entire
        return RadiusEstimate(INF, 0.0, 0.0, [], infinite=True, negative_coefficients=negative)
    n = np.arange(1, arr.size + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = arr[1:] / arr[:-1]
    inv_n = 1.0 / n[1:]
    ok = np.isfinite(ratios)
    start = int(len(ratios) * (1.0 - tail_fraction))
    sel = np.zeros_like(ok)
    sel[start:] = True
    sel &= ok
    if sel.sum() < 2:
        raise InsufficientTerms("not enough finite ratios in the tail")
    x = inv_n[sel]
    y = np.abs(ratios[sel])
    slope, intercept = np.polyfit(x, y, 1)
    scale = max(float(np.max(y)), 1e-300)
    if intercept <= 1e-9 * scale or intercept <= 0:
        return RadiusEstimate(INF, float(intercept), float(slope), ratios.tolist(), infinite=True,
                              negative_coefficients=negative)
    return RadiusEstimate(1.0 / float(intercept), float(intercept), float(slope), ratios.tolist(),
                          negative_coefficients=negative)


@dataclass
class PrimitiveForm:
    """How p(k) continues beyond the listed values.

    ``finite``: exactly the listed values, zero afterwards (f entire).
    ``lipatov``: p(k) = c**k k! (rho = 1/c).
    ``inverse_factorial``: p(k) = 1/k! (f entire).
    ``sampled``: unknown continuation; rho is estimated from p(k)/k!.
    """

    kind: str = "finite"
    c: float | None = None

    def __post_init__(self):
        if self.kind not in ("finite", "lipatov", "inverse_factorial", "sampled"):
            raise ValueError(f"unknown primitive form {self.kind!r}")
        if self.kind == "lipatov" and (self.c is None or self.c <= 0):
            raise ValueError("lipatov form needs c > 0")

    def values(self, N: int) -> list[Fraction]:
        if self.kind == "lipatov":
            c = Fraction(self.c)
            return [c**k * math.factorial(k) for k in range(1, N + 1)]
        if self.kind == "inverse_factorial":
            return [Fraction(1, math.factorial(k)) for k in range(1, N + 1)]
        raise ValueError(f"form {self.kind!r} carries no generator")


def rho_of_primitives(p: Sequence, form: PrimitiveForm | None = None) -> float:
    """Radius of f(x) = sum_k p(k) x^k / k!."""
    form = form or PrimitiveForm("finite")
    if form.kind in ("finite", "inverse_factorial"):
        return INF
    if form.kind == "lipatov":
        return 1.0 / float(form.c)
    b = [float(Fraction(v) / math.factorial(k)) for k, v in enumerate(p, start=1)]
    return estimate_radius(b).radius


def is_boundary_case(p: Sequence, s: int) -> bool:
    """s = 1 with only a one-loop primitive: gamma_1 = p(1) x exactly."""
    return s == 1 and all(Fraction(v) == 0 for v in list(p)[1:])


@dataclass
class Theory:
    radius: float
    lower_bound_only: bool = False
    boundary_case: bool = False


def theoretical_radius(p: Mapping[str, Sequence], s: Mapping[str, int],
                       gamma11: Mapping[str, Fraction | float],
                       forms: Mapping[str, PrimitiveForm] | None = None) -> Theory:
    """min_r {rho_r, 1 / sum_j |s_j| a^j_1}, with the infinite conventions."""
    forms = forms or {}
    residues = list(p)
    if len(residues) == 1:
        r = residues[0]
        if forms.get(r, PrimitiveForm()).kind == "finite" and is_boundary_case(p[r], s[r]):
            return Theory(INF, boundary_case=True)
    mixed = any(Fraction(v) < 0 for r in residues for v in p[r])
    denom = sum(abs(s[j]) * float(gamma11[j]) for j in residues)
    if mixed:
        denom = abs(denom)
    second = INF if denom == 0 else 1.0 / denom
    if denom < 0:
        # cannot happen for nonnegative data; keep it visible rather than clamp
        second = INF
    rho = min(rho_of_primitives(p[r], forms.get(r)) for r in residues)
    return Theory(min(rho, second), lower_bound_only=mixed)


@dataclass
class ResidueReport:
    a: list[float]
    ratios: list[float]
    estimate: float
    domb_sykes_intercept: float
    theoretical: float | None
    deviation: float | None
    boundary_case: bool = False
    negative_coefficients: bool = False
    infinite_radius: bool = False
    lower_bound_only: bool = False


@dataclass
class RadiusReport:
    residues: dict[str, ResidueReport]

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, float) and not math.isfinite(v):
                return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
            return v

        doc = {r: {k: ([enc(x) for x in v] if isinstance(v, list) else enc(v))
                   for k, v in asdict(rep).items()}
               for r, rep in self.residues.items()}
        return json.dumps(doc, indent=2, sort_keys=True)

    def a_table_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["residue", "n", "a_n"])
        for r, rep in self.residues.items():
            for n, v in enumerate(rep.a, start=1):
                w.writerow([r, n, repr(v)])
        return buf.getvalue()


def analyze(gamma1: Mapping[str, RationalSeries], p: Mapping[str, Sequence], s: Mapping[str, int],
            forms: Mapping[str, PrimitiveForm] | None = None) -> RadiusReport:
    """Estimate and theory side by side for every residue."""
    theory = theoretical_radius(p, s, {r: g[1] for r, g in gamma1.items()}, forms)
    out = {}
    for r, g in gamma1.items():
        a = borel_coefficients(g)
        try:
            est = estimate_radius(a)
            estimate, intercept, ratios, infinite = est.radius, est.intercept, est.ratios, est.infinite
        except InsufficientTerms:
            estimate, intercept, ratios, infinite = math.nan, math.nan, [], False
        t = theory.radius
        dev = None
        if math.isfinite(t) and math.isfinite(estimate):
            dev = abs(estimate - t) / t
        out[r] = ResidueReport(
            a=a.tolist(), ratios=ratios, estimate=estimate, domb_sykes_intercept=intercept,
            theoretical=t, deviation=dev, boundary_case=theory.boundary_case,
            negative_coefficients=bool(np.any(a < 0)),
            infinite_radius=infinite or (theory.boundary_case and not math.isfinite(t)),
            lower_bound_only=theory.lower_bound_only,
        )
    return RadiusReport(out)


def same_radius_check(gamma1: Mapping[str, RationalSeries], tolerance: float = 0.1) -> bool:
    """Pairwise agreement of the per-residue estimates within ``tolerance``."""
    ests = [estimate_radius(borel_coefficients(g)).radius for g in gamma1.values()]
    if all(not math.isfinite(e) for e in ests):
        return True
    if any(not math.isfinite(e) for e in ests):
        return False
    lo, hi = min(ests), max(ests)
    return (hi - lo) / lo <= tolerance

"""Exact truncated power series and Laurent data over the rationals.

Everything here works with :class:`fractions.Fraction`; no operation
introduces floating point.  A :class:`RationalSeries` carries its own
truncation order, and binary operations truncate to the smaller of the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

RationalLike = Union[Fraction, int, str]


class ZeroConstantTerm(ArithmeticError):
    """Raised when inverting a series whose constant term vanishes."""


class InsufficientLaurentOrder(ValueError):
    """Raised when a Laurent coefficient beyond the stored order is needed."""


class PoleAtOrigin(ValueError):
    """Raised when a pole location coincides with the subtraction point."""


def to_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_fraction(value: Fraction) -> str:
    """``p/q`` with the denominator dropped when it is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def generalized_binomial(e: int, m: int) -> int:
    """binom(e, m) for any integer e (negative allowed) and m >= 0."""
    num = 1
    den = 1
    for i in range(m):
        num *= e - i
        den *= i + 1
    return num // den


@dataclass(frozen=True)
class RationalSeries:
    """Coefficients ``coeffs[n]`` of x**n for n = 0..truncation."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable[RationalLike], truncation: int | None = None):
        values = [to_fraction(c) for c in coeffs]
        if truncation is not None:
            if truncation < 0:
                raise ValueError("truncation must be >= 0")
            values = values[: truncation + 1]
            values += [Fraction(0)] * (truncation + 1 - len(values))
        if not values:
            raise ValueError("a series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(values))

    @classmethod
    def zero(cls, truncation: int) -> RationalSeries:
        return cls([], truncation)

    @classmethod
    def one(cls, truncation: int) -> RationalSeries:
        return cls([1], truncation)

    @classmethod
    def monomial(cls, n: int, truncation: int, c: RationalLike = 1) -> RationalSeries:
        values = [Fraction(0)] * (truncation + 1)
        if n <= truncation:
            values[n] = to_fraction(c)
        return cls(values)

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> Fraction:
        if n < 0:
            raise IndexError("negative powers are not stored")
        if n > self.truncation:
            return Fraction(0)
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def truncate(self, truncation: int) -> RationalSeries:
        return RationalSeries(self.coeffs, truncation)

    def valuation(self) -> int | None:
        for n, c in enumerate(self.coeffs):
            if c:
                return n
        return None

    def __add__(self, other: RationalSeries) -> RationalSeries:
        if not isinstance(other, RationalSeries):
            return NotImplemented
        n = min(self.truncation, other.truncation)
        return RationalSeries([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)])

    def __neg__(self) -> RationalSeries:
        return RationalSeries([-c for c in self.coeffs])

    def __sub__(self, other: RationalSeries) -> RationalSeries:
        if not isinstance(other, RationalSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, c: RationalLike) -> RationalSeries:
        c = to_fraction(c)
        return RationalSeries([c * a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, RationalSeries):
            return NotImplemented
        n = min(self.truncation, other.truncation)
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            ai = a[i]
            if not ai:
                continue
            for j in range(n + 1 - i):
                if b[j]:
                    out[i + j] += ai * b[j]
        return RationalSeries(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> RationalSeries:
        return series_pow(self, e)

    def reciprocal(self) -> RationalSeries:
        a = self.coeffs
        if a[0] == 0:
            raise ZeroConstantTerm("series has zero constant term")
        n = self.truncation
        inv0 = 1 / a[0]
        out = [inv0]
        for k in range(1, n + 1):
            acc = sum((a[i] * out[k - i] for i in range(1, k + 1)), Fraction(0))
            out.append(-acc * inv0)
        return RationalSeries(out)

    def x_ddx(self) -> RationalSeries:
        return RationalSeries([n * c for n, c in enumerate(self.coeffs)])

    def evaluate(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_json(self) -> list[str]:
        return [format_fraction(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, values: Sequence[RationalLike]) -> RationalSeries:
        return cls(values)

    def __repr__(self) -> str:
        return f"RationalSeries({self.to_json()})"


def series_add(a: RationalSeries, b: RationalSeries) -> RationalSeries:
    return a + b


def series_mul(a: RationalSeries, b: RationalSeries) -> RationalSeries:
    return a * b


def series_pow(a: RationalSeries, e: int) -> RationalSeries:
    """a**e; negative exponents go through the reciprocal first."""
    if e < 0:
        return series_pow(a.reciprocal(), -e)
    result = RationalSeries.one(a.truncation)
    base = a
    while e:
        if e & 1:
            result = result * base
        e >>= 1
        if e:
            base = base * base
    return result


def x_ddx(a: RationalSeries) -> RationalSeries:
    return a.x_ddx()


@dataclass(frozen=True)
class LaurentData:
    """Laurent coefficients ``f_{-1}, f_0, ..., f_M`` of F(rho) about rho = 0."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable[RationalLike]):
        values = tuple(to_fraction(c) for c in coeffs)
        if not values:
            raise ValueError("Laurent data needs at least the residue f_{-1}")
        object.__setattr__(self, "coeffs", values)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 2

    @property
    def residue(self) -> Fraction:
        return self.coeffs[0]

    def f(self, j: int) -> Fraction:
        if j < -1:
            return Fraction(0)
        if j > self.order:
            raise InsufficientLaurentOrder(
                f"coefficient f_{j} requested but data only reaches f_{self.order}"
            )
        return self.coeffs[j + 1]

    def truncate(self, order: int) -> LaurentData:
        if order > self.order:
            raise InsufficientLaurentOrder(f"cannot extend order {self.order} to {order}")
        return LaurentData(self.coeffs[: order + 2])

    def __add__(self, other: LaurentData) -> LaurentData:
        m = min(self.order, other.order)
        return LaurentData(a + b for a, b in zip(self.coeffs[: m + 2], other.coeffs[: m + 2]))

    def scale(self, c: RationalLike) -> LaurentData:
        c = to_fraction(c)
        return LaurentData(c * f for f in self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_json(self) -> list[str]:
        return [format_fraction(c) for c in self.coeffs]


def laurent_geometric(r: RationalLike, order: int) -> LaurentData:
    """r / (rho (1 - rho)): every coefficient equals r."""
    r = to_fraction(r)
    return LaurentData([r] * (order + 2))


def laurent_from_poles(scale: RationalLike, poles: Sequence[RationalLike], order: int) -> LaurentData:
    """Laurent data of ``scale / (rho * prod(p_i - rho))`` up to f_order."""
    scale = to_fraction(scale)
    pts = [to_fraction(p) for p in poles]
    if any(p == 0 for p in pts):
        raise PoleAtOrigin("pole at rho = 0 would make the pole at the origin non-simple")
    # rho * F as a series in rho, needed through rho**(order + 1)
    n = order + 1
    acc = RationalSeries([scale], n)
    for p in pts:
        acc = acc * RationalSeries([1 / p**(j + 1) for j in range(n + 1)])
    return LaurentData(acc.coeffs)


def poly_mul(a: Sequence[Fraction], b: Sequence[Fraction], cap: int | None = None) -> list[Fraction]:
    """Product of two dense coefficient lists, optionally cut at degree ``cap``."""
    if not a or not b:
        return []
    size = len(a) + len(b) - 1
    if cap is not None:
        size = min(size, cap + 1)
    out = [Fraction(0)] * size
    for i, ai in enumerate(a):
        if not ai or i >= size:
            continue
        for j, bj in enumerate(b):
            if i + j >= size:
                break
            if bj:
                out[i + j] += ai * bj
    return out


def poly_add_into(acc: list[Fraction], b: Sequence[Fraction], c: Fraction | int = 1) -> None:
    if len(acc) < len(b):
        acc.extend([Fraction(0)] * (len(b) - len(acc)))
    if c == 1:
        for i, bi in enumerate(b):
            if bi:
                acc[i] += bi
    else:
        for i, bi in enumerate(b):
            if bi:
                acc[i] += c * bi


@dataclass(frozen=True)
class BivariateSeries:
    """Triangular array: ``coeffs[n][j]`` is the coefficient of x**n L**j, j <= n."""

    coeffs: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalLike]]) -> BivariateSeries:
        out = []
        for n, row in enumerate(rows):
            vals = [to_fraction(c) for c in row][: n + 1]
            if any(to_fraction(c) for c in list(row)[n + 1 :]):
                raise ValueError(f"row {n} has a nonzero coefficient of L**j with j > n")
            vals += [Fraction(0)] * (n + 1 - len(vals))
            out.append(tuple(vals))
        return cls(tuple(out))

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, nj: tuple[int, int]) -> Fraction:
        n, j = nj
        if n > self.truncation or j > n or j < 0:
            return Fraction(0)
        return self.coeffs[n][j]

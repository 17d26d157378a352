"""Connes-Kreimer Hopf algebra of decorated rooted trees.

Trees are immutable and canonical (children sorted by their encoding), so
structural equality is tree isomorphism.  The coproduct is computed by direct
enumeration of admissible cuts, pruned part on the left and trunk on the
right; it is deliberately *not* derived from the B+ cocycle property, so
checking that property is a genuine test.

Serialization: a tree is its root decoration followed by its children in
parentheses, e.g. ``1(1,2(1))``; a forest is its trees separated by spaces,
and the empty forest is ``I``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Iterator, Sequence

from .series import generalized_binomial


@dataclass(frozen=True, eq=False)
class DecoratedTree:
    label: int
    children: tuple[DecoratedTree, ...] = ()
    # canonical encoding and node count, fixed at construction
    _enc: str = field(init=False, repr=False)
    _size: int = field(init=False, repr=False)

    def __post_init__(self):
        kids = tuple(sorted(self.children, key=_tree_key))
        object.__setattr__(self, "children", kids)
        enc = str(self.label) if not kids else f"{self.label}({','.join(c._enc for c in kids)})"
        object.__setattr__(self, "_enc", enc)
        object.__setattr__(self, "_size", 1 + sum(c._size for c in kids))

    @property
    def size(self) -> int:
        return self._size

    def encode(self) -> str:
        return self._enc

    def __eq__(self, other) -> bool:
        return isinstance(other, DecoratedTree) and self._enc == other._enc

    def __hash__(self) -> int:
        return hash(self._enc)

    def __str__(self) -> str:
        return self.encode()

    def __lt__(self, other: DecoratedTree) -> bool:
        return _tree_key(self) < _tree_key(other)


def _tree_key(t: DecoratedTree):
    return (t._size, t._enc)


@dataclass(frozen=True)
class Forest:
    """Sorted multiset of trees; ``Forest(())`` is the unit."""

    trees: tuple[DecoratedTree, ...] = ()

    def __post_init__(self):
        if len(self.trees) > 1:
            object.__setattr__(self, "trees", tuple(sorted(self.trees, key=_tree_key)))

    @classmethod
    def of(cls, *trees: DecoratedTree) -> Forest:
        return cls(tuple(trees))

    @property
    def size(self) -> int:
        return sum(t.size for t in self.trees)

    def is_unit(self) -> bool:
        return not self.trees

    def __mul__(self, other: Forest) -> Forest:
        return Forest(self.trees + other.trees)

    def encode(self) -> str:
        return " ".join(t.encode() for t in self.trees) if self.trees else "I"

    def __str__(self) -> str:
        return self.encode()


UNIT = Forest()


def parse_tree(text: str) -> DecoratedTree:
    pos = 0

    def parse() -> DecoratedTree:
        nonlocal pos
        start = pos
        while pos < len(text) and (text[pos].isdigit() or text[pos] == "-"):
            pos += 1
        if start == pos:
            raise ValueError(f"expected a decoration at position {pos} in {text!r}")
        label = int(text[start:pos])
        kids = []
        if pos < len(text) and text[pos] == "(":
            pos += 1
            while True:
                kids.append(parse())
                if pos >= len(text):
                    raise ValueError(f"unbalanced parentheses in {text!r}")
                if text[pos] == ",":
                    pos += 1
                    continue
                if text[pos] == ")":
                    pos += 1
                    break
                raise ValueError(f"unexpected {text[pos]!r} in {text!r}")
        return DecoratedTree(label, tuple(kids))

    text = text.strip()
    tree = parse()
    if pos != len(text):
        raise ValueError(f"trailing characters in {text!r}")
    return tree


def parse_forest(text: str) -> Forest:
    text = text.strip()
    if text in ("", "I"):
        return UNIT
    return Forest(tuple(parse_tree(part) for part in text.split()))


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def _coeff(c):
    # integers stay integers (much faster than Fraction); anything else is exact
    return c if isinstance(c, (int, Fraction)) and not isinstance(c, bool) else Fraction(c)


class HopfElement:
    """Finite Q-linear combination of forests."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Forest, Fraction] | None = None):
        self.terms = _clean(dict(terms or {}))

    @classmethod
    def of(cls, x: Forest | DecoratedTree, c=1) -> HopfElement:
        f = Forest.of(x) if isinstance(x, DecoratedTree) else x
        return cls({f: _coeff(c)})

    @classmethod
    def unit(cls) -> HopfElement:
        return cls({UNIT: 1})

    @classmethod
    def zero(cls) -> HopfElement:
        return cls()

    def __add__(self, other: HopfElement) -> HopfElement:
        out = dict(self.terms)
        for f, c in other.terms.items():
            out[f] = out.get(f, 0) + c
        return HopfElement(out)

    def __neg__(self) -> HopfElement:
        return HopfElement({f: -c for f, c in self.terms.items()})

    def __sub__(self, other: HopfElement) -> HopfElement:
        return self + (-other)

    def scale(self, c) -> HopfElement:
        c = _coeff(c)
        return HopfElement({f: c * v for f, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: dict[Forest, Fraction] = {}
        for f, a in self.terms.items():
            for g, b in other.terms.items():
                fg = f * g
                out[fg] = out.get(fg, 0) + a * b
        return HopfElement(out)

    __rmul__ = scale

    def __eq__(self, other) -> bool:
        if not isinstance(other, HopfElement):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def map_forests(self, fn: Callable[[Forest], HopfElement]) -> HopfElement:
        out = HopfElement()
        for f, c in self.terms.items():
            out = out + fn(f).scale(c)
        return out

    def coefficient(self, x: Forest | DecoratedTree) -> Fraction:
        f = Forest.of(x) if isinstance(x, DecoratedTree) else x
        return self.terms.get(f, Fraction(0))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = sorted(self.terms.items(), key=lambda kv: (kv[0].size, kv[0].encode()))
        return " + ".join(f"{c}*[{f}]" for f, c in parts)


class TensorElement:
    """Finite combination of tensor products of forests (any fixed arity)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[Forest, ...], Fraction] | None = None):
        self.terms = _clean(dict(terms or {}))

    @classmethod
    def pure(cls, a: HopfElement, b: HopfElement) -> TensorElement:
        out: dict[tuple[Forest, ...], Fraction] = {}
        for f, x in a.terms.items():
            for g, y in b.terms.items():
                out[(f, g)] = out.get((f, g), 0) + x * y
        return cls(out)

    def __add__(self, other: TensorElement) -> TensorElement:
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorElement(out)

    def __sub__(self, other: TensorElement) -> TensorElement:
        return self + other.scale(-1)

    def scale(self, c) -> TensorElement:
        c = _coeff(c)
        return TensorElement({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: TensorElement) -> TensorElement:
        """Slotwise product in the tensor-power algebra."""
        out: dict[tuple[Forest, ...], Fraction] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                if len(ka) != len(kb):
                    raise ValueError("tensor arities differ")
                key = tuple(a * b for a, b in zip(ka, kb))
                out[key] = out.get(key, 0) + ca * cb
        return TensorElement(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.terms == other.terms

    def apply(self, slot: int, fn: Callable[[Forest], HopfElement | TensorElement]) -> TensorElement:
        """Apply a linear map to one tensor slot (a coproduct widens the tensor)."""
        out: dict[tuple[Forest, ...], Fraction] = {}
        for key, c in self.terms.items():
            image = fn(key[slot])
            if isinstance(image, HopfElement):
                items = (((f,), v) for f, v in image.terms.items())
            else:
                items = image.terms.items()
            for parts, v in items:
                new = key[:slot] + tuple(parts) + key[slot + 1:]
                out[new] = out.get(new, 0) + c * v
        return TensorElement(out)

    def contract(self) -> HopfElement:
        """Multiply all slots together (the algebra product m)."""
        out: dict[Forest, Fraction] = {}
        for key, c in self.terms.items():
            f = UNIT
            for part in key:
                f = f * part
            out[f] = out.get(f, 0) + c
        return HopfElement(out)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = sorted(self.terms.items(), key=lambda kv: tuple(p.encode() for p in kv[0]))
        return " + ".join(f"{c}*[{' (x) '.join(p.encode() for p in k)}]" for k, c in parts)


# -- coproduct -----------------------------------------------------------------

def _partial_cuts(t: DecoratedTree) -> list[tuple[tuple[DecoratedTree, ...], DecoratedTree]]:
    """Admissible cuts of t keeping the root: (pruned trees, trunk)."""
    per_child = []
    for child in t.children:
        options: list[tuple[tuple[DecoratedTree, ...], DecoratedTree | None]] = [((child,), None)]
        options.extend(_partial_cuts_cached(child))
        per_child.append(options)
    out = []
    for combo in product(*per_child):
        pruned: tuple[DecoratedTree, ...] = ()
        kept = []
        for p, trunk in combo:
            pruned += p
            if trunk is not None:
                kept.append(trunk)
        out.append((pruned, DecoratedTree(t.label, tuple(kept))))
    return out


@lru_cache(maxsize=None)
def _partial_cuts_cached(t: DecoratedTree):
    return tuple(_partial_cuts(t))


@lru_cache(maxsize=None)
def _tree_coproduct(t: DecoratedTree) -> TensorElement:
    out: dict[tuple[Forest, ...], Fraction] = {(Forest.of(t), UNIT): 1}
    for pruned, trunk in _partial_cuts_cached(t):
        key = (Forest(pruned), Forest.of(trunk))
        out[key] = out.get(key, 0) + 1
    return TensorElement(out)


@lru_cache(maxsize=None)
def forest_coproduct(f: Forest) -> TensorElement:
    acc = TensorElement({(UNIT, UNIT): 1})
    for t in f.trees:
        dt = _tree_coproduct(t)
        out: dict[tuple[Forest, ...], Fraction] = {}
        for (a, b), x in acc.terms.items():
            for (c, d), y in dt.terms.items():
                key = (a * c, b * d)
                out[key] = out.get(key, 0) + x * y
        acc = TensorElement(out)
    return acc


def coproduct(e: HopfElement | Forest | DecoratedTree) -> TensorElement:
    if isinstance(e, DecoratedTree):
        return _tree_coproduct(e)
    if isinstance(e, Forest):
        return forest_coproduct(e)
    out = TensorElement()
    for f, c in e.terms.items():
        out = out + forest_coproduct(f).scale(c)
    return out


def counit(f: Forest) -> Fraction:
    return Fraction(1) if f.is_unit() else Fraction(0)


# -- antipode ------------------------------------------------------------------

@lru_cache(maxsize=None)
def _tree_antipode(t: DecoratedTree) -> HopfElement:
    out = HopfElement.of(t, -1)
    for pruned, trunk in _partial_cuts_cached(t):
        if not pruned:
            continue
        out = out - forest_antipode(Forest(pruned)) * HopfElement.of(trunk)
    return out


@lru_cache(maxsize=None)
def forest_antipode(f: Forest) -> HopfElement:
    acc = HopfElement.unit()
    for t in f.trees:
        acc = acc * _tree_antipode(t)
    return acc


def antipode(e: HopfElement | Forest | DecoratedTree) -> HopfElement:
    if isinstance(e, DecoratedTree):
        return _tree_antipode(e)
    if isinstance(e, Forest):
        return forest_antipode(e)
    return e.map_forests(forest_antipode)


# -- B+ and the cocycle ----------------------------------------------------------

def b_plus(f: Forest, decoration: int = 1) -> DecoratedTree:
    return DecoratedTree(decoration, f.trees)


def b_plus_linear(e: HopfElement, decoration: int = 1) -> HopfElement:
    return e.map_forests(lambda f: HopfElement.of(b_plus(f, decoration)))


def check_cocycle(f: Forest, decoration: int = 1) -> bool:
    lhs = coproduct(b_plus(f, decoration))
    rhs = coproduct(f).apply(1, lambda g: HopfElement.of(b_plus(g, decoration)))
    rhs = rhs + TensorElement({(Forest.of(b_plus(f, decoration)), UNIT): 1})
    return lhs == rhs


# -- Hopf axioms -----------------------------------------------------------------

def check_coassociativity(f: Forest) -> bool:
    d = forest_coproduct(f)
    return d.apply(0, forest_coproduct) == d.apply(1, forest_coproduct)


def check_counit(f: Forest) -> bool:
    d = forest_coproduct(f)
    target = HopfElement.of(f)
    left = HopfElement()
    right = HopfElement()
    for (a, b), c in d.terms.items():
        if a.is_unit():
            left = left + HopfElement.of(b, c)
        if b.is_unit():
            right = right + HopfElement.of(a, c)
    return left == target and right == target


def check_antipode(f: Forest) -> bool:
    d = forest_coproduct(f)
    expected = HopfElement.unit() if f.is_unit() else HopfElement()
    left = d.apply(0, forest_antipode).contract()
    right = d.apply(1, forest_antipode).contract()
    return left == expected and right == expected


def check_involution(f: Forest) -> bool:
    return antipode(antipode(f)) == HopfElement.of(f)


def check_grading(f: Forest) -> bool:
    n = f.size
    return all(a.size + b.size == n for a, b in forest_coproduct(f).terms)


# -- enumeration -----------------------------------------------------------------

@lru_cache(maxsize=None)
def trees_of_size(n: int, decorations: tuple[int, ...] = (1, 2)) -> tuple[DecoratedTree, ...]:
    if n < 1:
        return ()
    out = set()
    for forest in forests_of_size(n - 1, decorations):
        for d in decorations:
            out.add(b_plus(forest, d))
    return tuple(sorted(out, key=_tree_key))


@lru_cache(maxsize=None)
def forests_of_size(n: int, decorations: tuple[int, ...] = (1, 2)) -> tuple[Forest, ...]:
    """All forests with exactly n nodes (the unit for n = 0)."""
    if n == 0:
        return (UNIT,)
    out = set()
    # first tree takes m nodes; the remainder is any forest of n - m nodes
    for m in range(1, n + 1):
        for t in trees_of_size(m, decorations):
            for rest in forests_of_size(n - m, decorations):
                out.add(Forest.of(t) * rest)
    return tuple(sorted(out, key=lambda f: (f.size, f.encode())))


def all_forests(max_nodes: int, decorations: Sequence[int] = (1, 2)) -> list[Forest]:
    decs = tuple(decorations)
    return [f for n in range(max_nodes + 1) for f in forests_of_size(n, decs)]


def _check_one(args) -> tuple[str, bool]:
    name, encoded = args
    f = parse_forest(encoded)
    return name, AXIOM_CHECKS[name](f)


AXIOM_CHECKS: dict[str, Callable[[Forest], bool]] = {
    "coassociativity": check_coassociativity,
    "counit": check_counit,
    "antipode": check_antipode,
    "involution": check_involution,
    "cocycle": lambda f: all(check_cocycle(f, d) for d in (1, 2)),
    "grading": check_grading,
}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DYSON_THREADS", "1")))
    except ValueError:
        return 1


def exhaustive_axiom_check(max_nodes: int = 6, decorations: Sequence[int] = (1, 2),
                           checks: Iterable[str] | None = None) -> dict[str, list[str]]:
    """Run the Hopf axioms on every forest up to ``max_nodes``; returns failures per axiom."""
    names = list(checks) if checks is not None else list(AXIOM_CHECKS)
    forests = all_forests(max_nodes, decorations)
    failures: dict[str, list[str]] = {n: [] for n in names}
    jobs = [(n, f.encode()) for n in names for f in forests]
    workers = _threads()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results: Iterator = pool.map(_check_one, jobs, chunksize=64)
            for (name, ok), (_, enc) in zip(results, jobs):
                if not ok:
                    failures[name].append(enc)
    else:
        for name, enc in jobs:
            if not AXIOM_CHECKS[name](parse_forest(enc)):
                failures[name].append(enc)
    return failures


# -- combinatorial Dyson-Schwinger equation ---------------------------------------

HopfSeries = list  # list[HopfElement], index = power of x


def _series_mul(a: HopfSeries, b: HopfSeries, n: int) -> HopfSeries:
    out = [HopfElement() for _ in range(n + 1)]
    for i in range(min(n, len(a) - 1) + 1):
        if not a[i].terms:
            continue
        for j in range(min(n - i, len(b) - 1) + 1):
            if b[j].terms:
                out[i + j] = out[i + j] + a[i] * b[j]
    return out


def series_power(X: HopfSeries, e: int, n: int) -> HopfSeries:
    """X**e to order x**n for X = I + O(x), any integer e."""
    y = [HopfElement()] + [X[i] if i < len(X) else HopfElement() for i in range(1, n + 1)]
    out = [HopfElement.unit()] + [HopfElement() for _ in range(n)]
    ym = [HopfElement.unit()] + [HopfElement() for _ in range(n)]
    for m in range(1, n + 1):
        ym = _series_mul(ym, y, n)
        c = generalized_binomial(e, m)
        if c:
            out = [o + t.scale(c) for o, t in zip(out, ym)]
    return out


def _sign(s: int) -> int:
    return 1 if s >= 0 else -1


def combinatorial_dse(s: int, N: int) -> HopfSeries:
    """[x^n]X for n = 0..N, where X = I - sign(s) sum_k x^k B+^{(k)}(X^{1 - s k})."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if s == 0:
        raise ValueError("s must be nonzero")
    X: HopfSeries = [HopfElement.unit()]
    for n in range(1, N + 1):
        acc = HopfElement()
        for k in range(1, n + 1):
            pw = series_power(X, 1 - s * k, n - k)
            acc = acc + b_plus_linear(pw[n - k], k)
        X.append(acc.scale(-_sign(s)))
    return X


def check_breaking_apart(s: int, k: int, X: HopfSeries | None = None) -> bool:
    """Delta([x^k]X) == sum_j [x^j] X^{1 - s(k-j)} (x) [x^{k-j}]X."""
    if X is None or len(X) <= k:
        X = combinatorial_dse(s, k)
    lhs = coproduct(X[k])
    rhs = TensorElement()
    for j in range(k + 1):
        pw = series_power(X, 1 - s * (k - j), j)
        rhs = rhs + TensorElement.pure(pw[j], X[k - j])
    return lhs == rhs

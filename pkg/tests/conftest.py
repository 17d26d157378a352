from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from dsegrowth.series import LaurentData
from dsegrowth.solver import TheorySpec

ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture
def acceptance():
    """Record the outcome of an acceptance criterion for the summary lines."""

    def record(number: int, ok: bool, detail: str = ""):
        ACCEPTANCE[number] = ("PASS" if ok else "FAIL", detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"AC{n}: {status}  {detail}".rstrip())


small_fracs = st.fractions(min_value=-3, max_value=3, max_denominator=5)
nonneg_fracs = st.fractions(min_value=0, max_value=3, max_denominator=5)


def laurent_st(order: int, elements=small_fracs):
    return st.lists(elements, min_size=order + 2, max_size=order + 2).map(LaurentData)


def random_single_spec(rng, s: int, N: int, loops: int = 2, convention: str = "rg") -> TheorySpec:
    """Random nonnegative Mellin data at loop orders 1..loops."""
    prims = {}
    for k in range(1, loops + 1):
        prims[k] = LaurentData([Fraction(rng.randint(0, 6), rng.randint(1, 4)) for _ in range(N + 2)])
    return TheorySpec.single(s, prims, N, convention=convention)

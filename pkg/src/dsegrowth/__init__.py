"""Dyson-Schwinger equations: exact perturbative expansions, recursions and growth."""

from __future__ import annotations

__version__ = "0.1.0"

from .series import LaurentData, RationalSeries, laurent_from_poles, laurent_geometric
from .solver import GammaTable, TheorySpec, solve_single, solve_system
from .reduce import ReductionResult, reduce_single, reduce_system, verify_reduction
from .recursions import PrimitiveSeries, first_recursion, second_recursion_single, second_recursion_system

__all__ = [
    "__version__", "LaurentData", "RationalSeries", "laurent_from_poles", "laurent_geometric",
    "GammaTable", "TheorySpec", "solve_single", "solve_system",
    "ReductionResult", "reduce_single", "reduce_system", "verify_reduction",
    "PrimitiveSeries", "first_recursion", "second_recursion_single", "second_recursion_system",
]

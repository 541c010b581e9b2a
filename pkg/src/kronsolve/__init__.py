"""Kronecker representations of polynomial-system zero sets.

Solves {F_1 = 0, ..., F_r = 0, G != 0} over prime fields, their
extensions, and the rationals, returning a Kronecker representation of a
zero-dimensional lifting fiber: a random linear change of variables, a
lifting point, the minimal polynomial m of a primitive linear form, and
parametrizations of the remaining coordinates.
"""

from .errors import (
    EmptyVariety,
    FieldTooSmall,
    KronError,
    NoReconstruction,
    RetriesExhausted,
)
from .qlift import solve_over_Q
from .slp import SystemSpec, build_system, parse_expression
from .solver import Fiber, SolveConfig, solve, verify

__all__ = [
    "EmptyVariety",
    "Fiber",
    "FieldTooSmall",
    "KronError",
    "NoReconstruction",
    "RetriesExhausted",
    "SolveConfig",
    "SystemSpec",
    "build_system",
    "parse_expression",
    "solve",
    "solve_over_Q",
    "verify",
]

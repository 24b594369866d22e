"""Named benchmark problems and their known auxiliary-qudit counts and rates."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .construct import LCProblem, validate_problem
from .gf import FieldSpec, field_of_order


def example1(field: FieldSpec | int = 3) -> LCProblem:
    """Four single-stream servers; the user wants ``A + C + D`` and ``B + C + D``."""
    field = field_of_order(field) if isinstance(field, int) else field
    cols = [[1, 0], [0, 1], [1, 1], [1, 1]]
    return validate_problem(field, 2, [[[a], [b]] for a, b in cols], name="example1")


def example2(field: FieldSpec | int = 5) -> LCProblem:
    """``W_1 + W_3`` and ``W_2 + W_4``."""
    field = field_of_order(field) if isinstance(field, int) else field
    cols = [[1, 0], [0, 1], [1, 0], [0, 1]]
    return validate_problem(field, 2, [[[a], [b]] for a, b in cols], name="example2")


def example3(S: int, field: FieldSpec | int = 3) -> LCProblem:
    """Server 1 holds ``S`` streams with ``V_1 = I_S``; servers 2..S each add to the first combination."""
    field = field_of_order(field) if isinstance(field, int) else field
    eye = np.eye(S, dtype=np.int64)
    blocks = [eye] + [eye[:, :1]] * (S - 1)
    return validate_problem(field, S, blocks, name=f"example3_S{S}")


def sigma(S: int, field: FieldSpec | int = 3) -> LCProblem:
    """A single sum of ``S`` scalar streams."""
    field = field_of_order(field) if isinstance(field, int) else field
    return validate_problem(field, 1, [[[1]]] * S, name=f"sigma_S{S}")


def expected(target: str, S: int | None = None, d: int | None = None) -> dict:
    """Known auxiliary-qudit count and rate for a named target.

    Keys: ``c``, ``rate`` and, where known, ``proven_optimal`` and
    ``identity_c`` (the count without precoding).
    """
    if target == "example1":
        return {"c": 1, "rate": Fraction(4, 5), "proven_optimal": True}
    if target == "example2":
        out = {"c": 0, "rate": Fraction(1)}
        if d is not None:
            out["identity_c"] = 0 if d == 2 else 2
        return out
    if target == "example3":
        return {"c": S - 1, "rate": Fraction(2 * S, 3 * S - 2)}
    if target == "sigma":
        return {"c": 0, "rate": Fraction(2, S)}
    raise ValueError(f"unknown target {target!r}")


TARGETS = ("example1", "example2", "example3", "sigma")


def build_target(target: str, S: int | None = None, d: int | None = None) -> LCProblem:
    if target == "example1":
        if d is not None and d < 3:
            raise ValueError("example1 reaches c = 1 only for d >= 3")
        return example1(d or 3)
    if target == "example2":
        return example2(d or 5)
    if target == "example3":
        return example3(S or 3, d or 3)
    if target == "sigma":
        return sigma(S or 4, d or 3)
    raise ValueError(f"unknown target {target!r}")

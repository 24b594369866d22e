"""JSON encodings of problems, plans and reports (``schema_version`` 1)."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .construct import EncodingPlan, LCProblem, SOMatrix, validate_problem
from .gf import FieldSpec
from .matf import MatF

SCHEMA_VERSION = 1


class MalformedFile(ValueError):
    pass


def _read(source) -> dict:
    if isinstance(source, dict):
        return source
    try:
        return json.loads(Path(source).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedFile(f"cannot read {source}: {exc}") from exc


def _check_version(data: dict) -> None:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise MalformedFile(f"unsupported schema_version {version}")


def rate_dict(rate: Fraction) -> dict:
    return {"num": rate.numerator, "den": rate.denominator}


def problem_to_dict(problem: LCProblem) -> dict:
    out = {"schema_version": SCHEMA_VERSION}
    if problem.name:
        out["name"] = problem.name
    out["field"] = problem.field.as_dict()
    out["K"] = problem.K
    out["servers"] = [{"V": b.tolist()} for b in problem.blocks]
    return out


def problem_from_dict(source) -> LCProblem:
    """Parse and validate a problem file; rank violations propagate as ``InvalidProblem``."""
    data = _read(source)
    _check_version(data)
    try:
        field = FieldSpec.from_dict(data["field"])
        K = int(data["K"])
        blocks = [MatF(field, srv["V"]) for srv in data["servers"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(f"malformed problem: {exc}") from exc
    return validate_problem(field, K, blocks, data.get("name"))


def plan_to_dict(plan: EncodingPlan) -> dict:
    out = problem_to_dict(plan.problem)
    out["kind"] = "plan"
    out["precoders"] = [P.tolist() for P in plan.precoders]
    out["c"] = plan.c
    out["expansion"] = {"Vbar_prime": plan.Hp.tolist(), "V_prime": plan.Gp.tolist()}
    out["Ml"] = plan.so.Ml.tolist()
    out["Mr"] = plan.so.Mr.tolist()
    out["allocation"] = list(plan.allocation)
    out["rate"] = rate_dict(plan.rate)
    return out


def plan_from_dict(source) -> EncodingPlan:
    """Rebuild a plan exactly as stored, without re-deriving or checking it."""
    data = _read(source)
    _check_version(data)
    problem = problem_from_dict(data)
    field = problem.field
    K = problem.K
    try:
        c = int(data["c"])
        precoders = tuple(MatF(field, P) for P in data["precoders"])
        Hp = MatF(field, data["expansion"]["Vbar_prime"], shape=(K, c))
        Gp = MatF(field, data["expansion"]["V_prime"], shape=(K, c))
        N = problem.m + c
        Ml = MatF(field, data["Ml"], shape=(2 * K, N))
        Mr = MatF(field, data["Mr"], shape=(2 * K, N))
        allocation = tuple(int(a) for a in data["allocation"])
        rate = Fraction(int(data["rate"]["num"]), int(data["rate"]["den"]))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedFile(f"malformed plan: {exc}") from exc
    return EncodingPlan(problem, precoders, c, Hp, Gp, SOMatrix(Ml, Mr), allocation, rate)


_FLAT_LIST = re.compile(r"\[\s*(-?\d+(?:,\s*-?\d+)*)\s*\]")


def dumps(data: dict) -> str:
    """Indented JSON with innermost integer lists kept on one line."""
    text = json.dumps(data, indent=2)
    return _FLAT_LIST.sub(lambda m: "[" + ", ".join(m.group(1).replace(",", " ").split()) + "]", text) + "\n"

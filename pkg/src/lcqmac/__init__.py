"""Entanglement-assisted coding plans for linear computation over a quantum MAC."""

__version__ = "0.1.0"

from .construct import (  # noqa: E402
    EncodingPlan,
    LCProblem,
    SOMatrix,
    build_plan,
    check_so,
    classical_decode,
    expand_to_so,
    pair_transform,
    validate_problem,
    verify_plan,
)
from .gf import FieldSpec, field_new, field_of_order, field_trace  # noqa: E402
from .matf import MatF, mat_inverse, mat_rank, rank_normal_form  # noqa: E402
from .search import (  # noqa: E402
    SearchOutcome,
    brute_force_c,
    lower_bound_c,
    min_aux_qudits,
    objective_c,
    rate_of,
    region_check,
)

__all__ = [
    "EncodingPlan",
    "FieldSpec",
    "LCProblem",
    "MatF",
    "SOMatrix",
    "SearchOutcome",
    "brute_force_c",
    "build_plan",
    "check_so",
    "classical_decode",
    "expand_to_so",
    "field_new",
    "field_of_order",
    "field_trace",
    "lower_bound_c",
    "mat_inverse",
    "mat_rank",
    "min_aux_qudits",
    "objective_c",
    "pair_transform",
    "rank_normal_form",
    "rate_of",
    "region_check",
    "validate_problem",
    "verify_plan",
]

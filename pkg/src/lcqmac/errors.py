"""Exception hierarchy shared by every module."""

from __future__ import annotations


class LCQMACError(Exception):
    """Base class for all errors raised by the package."""


class FieldError(LCQMACError):
    """Invalid field parameters (composite modulus, reducible polynomial...)."""


class DimensionMismatch(LCQMACError, ValueError):
    pass


class FieldMismatch(LCQMACError, ValueError):
    pass


class SingularMatrix(LCQMACError, ArithmeticError):
    pass


class InvalidProblem(LCQMACError, ValueError):
    """A candidate problem violates one of the standing rank assumptions."""


class RankDeficientV(InvalidProblem):
    pass


class RedundantBlock(InvalidProblem):
    pass


class BlockTooWide(InvalidProblem):
    pass


class KTooLarge(InvalidProblem):
    pass


class RankDeficientInput(LCQMACError, ValueError):
    pass


class SingularPrecoder(LCQMACError, ValueError):
    pass


class BudgetExceeded(LCQMACError):
    def __init__(self, candidates: int, budget: int):
        super().__init__(f"{candidates} candidates exceed budget {budget}")
        self.candidates = candidates
        self.budget = budget


class StateTooLarge(LCQMACError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"state dimension {required} exceeds cap {cap}")
        self.required = required
        self.cap = cap


class CompletionFailure(LCQMACError):
    pass


class PhaseAssignmentFailure(LCQMACError):
    pass


class NondeterministicOutcome(LCQMACError):
    pass


class AmbiguousCharacter(LCQMACError):
    pass

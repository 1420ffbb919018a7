"""Error types shared by the invariant and pipeline stages."""

from __future__ import annotations

from .graph import PreconditionViolated


class ConditionKViolated(PreconditionViolated):
    """Some vertex has exactly one return path."""


class NotAnEquivalence(ValueError):
    """``U B V`` differs from ``B'`` or ``(U, V)`` is not block invertible."""


class GcdNotOne(ValueError):
    """A nonempty diagonal block has entry gcd different from 1."""

    def __init__(self, block: int, value: int):
        self.block = block
        self.value = value
        super().__init__(f"diagonal block {block + 1} has gcd {value}")


class SearchBudgetExceeded(RuntimeError):
    """A bounded search ran out of budget before finding a witness."""


class NotComparable(ValueError):
    """Two objects differ in an invariant that a pairing stage needs equal."""

    def __init__(self, site: str):
        self.site = site
        super().__init__(site)


class HypothesisViolated(ValueError):
    """A stage input violates a stated hypothesis."""


class NotPositive(ValueError):
    """A matrix is not in the positive class where it must be."""

    def __init__(self, block: str, reason: str = ""):
        self.block = block
        super().__init__(f"{block}: {reason}" if reason else block)


class NotSL(ValueError):
    """A diagonal block determinant is not +1."""


class IllegalStep(ValueError):
    """An elementary step cannot be realized as a legal move."""

    def __init__(self, step, reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"{step}: {reason}")


__all__ = ["ConditionKViolated", "NotAnEquivalence", "GcdNotOne", "SearchBudgetExceeded", "NotComparable",
           "HypothesisViolated", "NotPositive", "NotSL", "IllegalStep"]

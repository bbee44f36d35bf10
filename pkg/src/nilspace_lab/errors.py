"""Shared exception types and enumeration budgets."""
from __future__ import annotations

import os

# Default cap on brute-force candidate enumerations (maps, bijections, sections).
DEFAULT_CANDIDATE_BUDGET = 1 << 24

BUDGET_ENV_VAR = "NILSPACE_LAB_BUDGET"


def candidate_budget(override: int | None = None) -> int:
    """Resolve the enumeration budget: explicit override, else env var, else default."""
    if override is not None:
        return int(override)
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_CANDIDATE_BUDGET


class LabError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(LabError, ValueError):
    """An argument violates a documented precondition."""


class InvalidCornerError(InvalidArgumentError):
    """A corner map fails the face-membership precondition."""


class ResourceLimitError(LabError):
    """An exhaustive enumeration would exceed the configured budget."""

    def __init__(self, message: str, *, needed: int | None = None,
                 budget: int | None = None, dimension: int | None = None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget
        self.dimension = dimension


class StructuralFailureError(LabError):
    """A certification failed; the math said no.  Carries a witness."""

    def __init__(self, message: str, *, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedCaseError(LabError):
    """The operation's hypotheses exclude this input; no silent fallback."""

"""Semantic exception hierarchy.

Every failure mode a caller may want to branch on gets its own class;
all inherit from HndlxError so blanket handling stays possible.
"""

from __future__ import annotations


class HndlxError(Exception):
    """Base class for all package errors."""


class DomainError(HndlxError):
    """An argument is outside the mathematical domain of an operation."""


class InvalidInputError(HndlxError):
    """Non-finite or structurally malformed numeric input."""


class ValidationError(HndlxError):
    """One or more fields of a record violate their constraints.

    `fields` is a list of (field_name, message) pairs naming every offender.
    """

    def __init__(self, fields: list[tuple[str, str]]):
        self.fields = list(fields)
        detail = "; ".join(f"{name}: {msg}" for name, msg in self.fields)
        super().__init__(f"validation failed: {detail}")


class FeasibilityError(HndlxError):
    """A population spec cannot be realized (e.g. impossible rank correlation)."""


class UndefinedCorrelationError(HndlxError):
    """Rank correlation is undefined (constant sequence, too few points)."""


class StencilError(HndlxError):
    """A finite-difference stencil corner left the function's domain."""


class DegenerateComparisonError(HndlxError):
    """Vuong comparison between models that are identical on the data."""


class ConstantFunctionError(HndlxError):
    """Sensitivity analysis of a function with (numerically) zero variance."""


class NonIdentifiableError(HndlxError):
    """Fit attempted on a rank-deficient / degenerate design."""


class FitConvergenceError(HndlxError):
    """No optimizer restart converged.

    Carries the best-so-far parameter vector and the per-restart trace so the
    failure is diagnosable.
    """

    def __init__(self, message: str, best_params=None, trace=None):
        super().__init__(message)
        self.best_params = best_params
        self.trace = trace if trace is not None else []


class FormatError(HndlxError):
    """A file could not be parsed at all (position carried in the message)."""


class IngestError(HndlxError):
    """File-level ingestion rejection (error budget exceeded, duplicate ids)."""


class MigrationNeededError(HndlxError):
    """Persisted file has an unsupported format version."""


class CorruptFileError(HndlxError):
    """Persisted file is truncated or damaged; names the last good record."""

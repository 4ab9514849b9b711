"""Exception types shared across the package.

Refusals (bad inputs, violated preconditions) derive from ``ValidationError``;
failures of numerical machinery derive from ``SolverError``.  Both share the
``ConvexOrderError`` base so callers can catch everything from this package
with a single except clause.
"""
from __future__ import annotations


class ConvexOrderError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ConvexOrderError, ValueError):
    """An input violates a documented precondition."""


class DimensionError(ValidationError):
    """Unsupported or mismatched dimensionality."""


class SupportViolationError(ValidationError):
    """A measure lies outside the support region required by an operation."""


class SolverError(ConvexOrderError, RuntimeError):
    """A numerical routine failed (infeasible, not converged, unstable)."""


class SingularSystemError(SolverError):
    """A linear system was singular or its residual check failed."""


class BudgetExceededError(ConvexOrderError, RuntimeError):
    """An enumeration would exceed its configured evaluation budget."""


class RejectionStallError(SolverError):
    """A rejection sampler's acceptance rate collapsed."""


class DegenerateDomainError(ValidationError):
    """Scattered anchors do not span a usable 2D domain."""


class SpanTooSmallError(ValidationError):
    """A smoothing window contains too few points."""


class ArbitrageInSheetError(ValidationError):
    """A call-price sheet itself admits static arbitrage; extraction refuses."""


class InsufficientStrikesError(ValidationError):
    """A call-price sheet has too few strikes to extract a distribution."""


class NoArbitrageMarginError(ConvexOrderError):
    """Strategy construction found no positive margin between the two laws."""


class ExtrapolationWarning(UserWarning):
    """A potential or gradient was evaluated outside its anchor hull."""

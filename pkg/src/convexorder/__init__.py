"""Convex-order detection, convex-function recovery, and arbitrage tools."""

from .errors import (
    ArbitrageInSheetError,
    BudgetExceededError,
    ConvexOrderError,
    DegenerateDomainError,
    DimensionError,
    ExtrapolationWarning,
    InsufficientStrikesError,
    NoArbitrageMarginError,
    SingularSystemError,
    SolverError,
    SpanTooSmallError,
    SupportViolationError,
    ValidationError,
)
from .measures import DiscreteMeasure, make_ball_grid, measure_on_grid
from .order import ConvexOrderReport, OrderSearchConfig, decide, estimate_v, gap
from .transport import correlation_cost, cost_matrix, emd, sinkhorn, w2_squared

__all__ = [
    "ArbitrageInSheetError",
    "BudgetExceededError",
    "ConvexOrderError",
    "ConvexOrderReport",
    "DegenerateDomainError",
    "DimensionError",
    "DiscreteMeasure",
    "ExtrapolationWarning",
    "InsufficientStrikesError",
    "NoArbitrageMarginError",
    "OrderSearchConfig",
    "SingularSystemError",
    "SolverError",
    "SpanTooSmallError",
    "SupportViolationError",
    "ValidationError",
    "correlation_cost",
    "cost_matrix",
    "decide",
    "emd",
    "estimate_v",
    "gap",
    "make_ball_grid",
    "measure_on_grid",
    "sinkhorn",
    "w2_squared",
]

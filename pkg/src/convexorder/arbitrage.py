"""Calendar-spread arbitrage from call sheets.

A call sheet at each of two maturities pins down the marginal law of the
underlying through the second strike-derivative of the price curve.  If
the earlier law is NOT dominated in convex order by the later one, a
convex separating potential f yields a semi-static strategy — short f at
the first maturity, long f at the second, plus a forward position — whose
payoff is bounded below by the positive price margin.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import LinearNDInterpolator
from scipy.spatial import QhullError

from .errors import (
    ArbitrageInSheetError,
    DimensionError,
    ExtrapolationWarning,
    InsufficientStrikesError,
    NoArbitrageMarginError,
    ValidationError,
)
from .measures import DiscreteMeasure
from .recover import GradientField, ScalarField

logger = logging.getLogger(__name__)

_SHEET_TOL = 1e-9


@dataclass(frozen=True)
class CallSheet:
    """Call prices on a strike grid at one maturity."""

    maturity: str
    strikes: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        strikes = np.asarray(self.strikes, dtype=float).ravel()
        prices = np.asarray(self.prices, dtype=float).ravel()
        if strikes.size != prices.size:
            raise ValidationError("strike/price count mismatch")
        if strikes.size < 2:
            raise InsufficientStrikesError("a call sheet needs at least 2 strikes")
        if not np.isfinite(strikes).all() or not np.isfinite(prices).all():
            raise ValidationError("call sheet contains non-finite entries")
        if np.any(np.diff(strikes) <= 0):
            raise ValidationError("strikes must be strictly increasing")
        if np.any(prices < -_SHEET_TOL):
            raise ValidationError("call prices must be nonnegative")
        strikes = strikes.copy()
        prices = prices.copy()
        strikes.flags.writeable = False
        prices.flags.writeable = False
        object.__setattr__(self, "strikes", strikes)
        object.__setattr__(self, "prices", prices)

    @property
    def n_strikes(self) -> int:
        return self.strikes.size


def bl_extract(sheet: CallSheet) -> DiscreteMeasure:
    """Read the marginal law off a call sheet via slope jumps.

    The slope of the price curve jumps by exactly the probability mass at
    each interior strike; mass implied outside the quoted range (a left
    slope above -1 or a nonzero right slope) is assigned conservatively
    to the extreme interior strikes.  Sheets that are increasing or
    non-convex anywhere admit static arbitrage on their own and are
    refused.
    """
    if sheet.n_strikes < 3:
        raise InsufficientStrikesError(
            f"extraction needs at least 3 strikes, got {sheet.n_strikes}"
        )
    strikes, prices = sheet.strikes, sheet.prices
    rises = np.diff(prices)
    if np.any(rises > _SHEET_TOL):
        raise ArbitrageInSheetError(
            "call prices increase with strike (sell the higher strike)"
        )
    slopes = rises / np.diff(strikes)
    jumps = np.diff(slopes)
    if np.any(jumps < -_SHEET_TOL):
        k = int(np.argmin(jumps)) + 1
        raise ArbitrageInSheetError(
            f"price curve is concave at strike {strikes[k]} (butterfly arbitrage)"
        )

    weights = np.clip(jumps, 0.0, None)
    left_tail = 1.0 + slopes[0]
    right_tail = -slopes[-1]
    if left_tail < -_SHEET_TOL or right_tail < -_SHEET_TOL:
        raise ArbitrageInSheetError(
            f"edge slopes ({slopes[0]!r}, {slopes[-1]!r}) leave the price curve "
            "steeper than a forward"
        )
    weights[0] += max(left_tail, 0.0)
    weights[-1] += max(right_tail, 0.0)
    if max(left_tail, 0.0) + max(right_tail, 0.0) > 1e-12:
        logger.info(
            "bl_extract(%s): boundary mass %.3e (left) + %.3e (right) assigned "
            "to extreme interior strikes",
            sheet.maturity, max(left_tail, 0.0), max(right_tail, 0.0),
        )

    interior = strikes[1:-1]
    keep = weights > 0.0
    return DiscreteMeasure(
        points=interior[keep].reshape(-1, 1), weights=weights[keep]
    )


class _FieldEvaluator:
    """Interpolates a potential and its gradient away from their anchors.

    1D: piecewise linear between anchors, extended linearly beyond the
    range with the edge gradient values.  2D: linear interpolation on the
    anchor triangulation, falling back to the nearest anchor outside the
    hull.  Off-hull queries raise an ExtrapolationWarning either way.
    """

    def __init__(self, f: ScalarField, grad: GradientField):
        if f.dim not in (1, 2):
            raise DimensionError(f"strategy evaluation supports d in {{1,2}}, got {f.dim}")
        self.dim = f.dim
        if f.dim == 1:
            order = np.argsort(f.anchors.ravel(), kind="stable")
            self._fx = f.anchors.ravel()[order]
            self._fv = f.values[order]
            gorder = np.argsort(grad.anchors.ravel(), kind="stable")
            self._gx = grad.anchors.ravel()[gorder]
            self._gv = grad.values.ravel()[gorder]
            self._lo, self._hi = self._fx[0], self._fx[-1]
        else:
            try:
                self._f2 = LinearNDInterpolator(f.anchors, f.values)
                self._g2 = LinearNDInterpolator(grad.anchors, grad.values)
            except QhullError as exc:
                raise ValidationError(f"anchors do not triangulate: {exc}") from exc
            self._f_anchors = f.anchors
            self._f_values = f.values
            self._g_anchors = grad.anchors
            self._g_values = grad.values

    def _warn_outside(self, outside: np.ndarray):
        if outside.any():
            warnings.warn(
                f"{int(outside.sum())} evaluation point(s) outside the anchor hull; "
                "extending linearly",
                ExtrapolationWarning,
                stacklevel=3,
            )

    def eval_f(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DimensionError(f"expected dim {self.dim}, got {pts.shape[1]}")
        if self.dim == 1:
            x = pts.ravel()
            self._warn_outside((x < self._lo) | (x > self._hi))
            vals = np.interp(x, self._fx, self._fv)
            grad_lo = np.interp(self._lo, self._gx, self._gv)
            grad_hi = np.interp(self._hi, self._gx, self._gv)
            below = x < self._lo
            above = x > self._hi
            vals[below] = self._fv[0] + grad_lo * (x[below] - self._lo)
            vals[above] = self._fv[-1] + grad_hi * (x[above] - self._hi)
            return vals
        vals = self._f2(pts)
        outside = np.isnan(vals)
        self._warn_outside(outside)
        if outside.any():
            vals[outside] = _nearest(self._f_anchors, self._f_values, pts[outside])
        return vals

    def eval_grad(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DimensionError(f"expected dim {self.dim}, got {pts.shape[1]}")
        if self.dim == 1:
            x = pts.ravel()
            return np.interp(x, self._gx, self._gv).reshape(-1, 1)
        vals = self._g2(pts)
        outside = np.isnan(vals[:, 0])
        if outside.any():
            vals[outside] = _nearest(self._g_anchors, self._g_values, pts[outside])
        return vals


def _nearest(anchors: np.ndarray, values: np.ndarray, query: np.ndarray) -> np.ndarray:
    d2 = ((query[:, None, :] - anchors[None, :, :]) ** 2).sum(axis=2)
    return values[np.argmin(d2, axis=1)]


@dataclass(frozen=True)
class ArbitrageStrategy:
    """The semi-static triple: short f at T1, long f at T2, forward -grad f.

    ``margin`` is the cash collected up front, and with convex f it lower
    bounds the payoff over every market scenario.
    """

    potential: ScalarField
    gradient: GradientField
    cash_mu: float
    cash_nu: float
    margin: float
    _eval: _FieldEvaluator

    @property
    def dim(self) -> int:
        return self.potential.dim

    def u1(self, x: np.ndarray) -> np.ndarray:
        """Static option payoff at the first maturity: -f(x)."""
        return -self._eval.eval_f(x)

    def u2(self, y: np.ndarray) -> np.ndarray:
        """Static option payoff at the second maturity: +f(y)."""
        return self._eval.eval_f(y)

    def delta(self, x: np.ndarray) -> np.ndarray:
        """Forward position entered at the first maturity: -grad f(x)."""
        return -self._eval.eval_grad(x)

    def eval_f(self, points: np.ndarray) -> np.ndarray:
        return self._eval.eval_f(points)

    def eval_grad(self, points: np.ndarray) -> np.ndarray:
        return self._eval.eval_grad(points)


def build_strategy(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    f: ScalarField,
    grad: GradientField,
) -> ArbitrageStrategy:
    """Package the strategy, refusing when the price margin is not positive.

    The margin is int f dmu - int f dnu; a nonpositive value means this
    potential does not separate the two laws and no arbitrage claim can
    be made from it.
    """
    if mu.dim != nu.dim or mu.dim != f.dim or grad.dim != f.dim:
        raise DimensionError(
            f"dimension mismatch: mu {mu.dim}, nu {nu.dim}, f {f.dim}, grad {grad.dim}"
        )
    evaluator = _FieldEvaluator(f, grad)
    cash_mu = float(mu.weights @ evaluator.eval_f(mu.points))
    cash_nu = float(nu.weights @ evaluator.eval_f(nu.points))
    margin = cash_mu - cash_nu
    if margin <= 0.0:
        raise NoArbitrageMarginError(
            f"margin {margin!r} is not positive; the two laws are not separated "
            "by this potential"
        )
    logger.info("build_strategy: margin %.6g", margin)
    return ArbitrageStrategy(
        potential=f,
        gradient=grad,
        cash_mu=cash_mu,
        cash_nu=cash_nu,
        margin=margin,
        _eval=evaluator,
    )


def payoff(strategy: ArbitrageStrategy, x: np.ndarray, y: np.ndarray) -> float:
    """Realized profit when the underlying shows x at T1 and y at T2.

    Equals margin plus the Bregman divergence of f between y and x, so a
    convex potential keeps it at or above the margin.
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    y = np.asarray(y, dtype=float).reshape(1, -1)
    fx = strategy.eval_f(x)[0]
    fy = strategy.eval_f(y)[0]
    dx = strategy.delta(x)[0]
    return float(
        -fx + strategy.cash_mu + fy - strategy.cash_nu + dx @ (y - x).ravel()
    )


@dataclass(frozen=True)
class VerificationReport:
    min_payoff: float
    argmin_pair: tuple
    mean_payoff: float
    n_pairs: int

    @property
    def passed(self) -> bool:
        return self.min_payoff > 0.0


def verify_strategy(
    strategy: ArbitrageStrategy,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    pairs: tuple[np.ndarray, np.ndarray] | None = None,
) -> VerificationReport:
    """Scan payoff over scenario pairs; PASS means every payoff is positive.

    By default the scan covers the full product of mu's and nu's atoms.
    A custom plan supplies (xs, ys) arrays scanned as a product as well.
    """
    xs = mu.points if pairs is None else np.atleast_2d(pairs[0])
    ys = nu.points if pairs is None else np.atleast_2d(pairs[1])
    fx = strategy.eval_f(xs)
    fy = strategy.eval_f(ys)
    dx = strategy.eval_grad(xs)
    # payoff matrix over the pair product: margin + f(y) - f(x) - grad f(x).(y - x)
    cross = -dx @ ys.T + np.sum(dx * xs, axis=1)[:, None]
    matrix = (
        strategy.cash_mu - strategy.cash_nu - fx[:, None] + fy[None, :] + cross
    )
    flat = int(np.argmin(matrix))
    i, j = np.unravel_index(flat, matrix.shape)
    report = VerificationReport(
        min_payoff=float(matrix[i, j]),
        argmin_pair=(xs[i].copy(), ys[j].copy()),
        mean_payoff=float(matrix.mean()),
        n_pairs=int(matrix.size),
    )
    logger.info(
        "verify_strategy: %s (min %.6g over %d pairs)",
        "PASS" if report.passed else "FAIL", report.min_payoff, report.n_pairs,
    )
    return report

"""Exact and entropic optimal transport between discrete measures.

The workhorse is a transportation linear program solved with HiGHS via
``scipy.optimize.linprog``; every solve is certified by its duality gap.
One-dimensional cost evaluations additionally have an exact monotone
(quantile-coupling) fast path, cross-checked against the LP in the test
suite.  Entropic smoothing (Sinkhorn) is provided for comparison and is
always rounded back to exact marginals.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from .errors import DimensionError, SolverError, ValidationError
from .measures import BallGrid, DiscreteMeasure

logger = logging.getLogger(__name__)

_DUALITY_GAP_TOL = 1e-7
_MARGINAL_TOL = 1e-7

COST_KINDS = ("squared_euclidean", "neg_inner_product")


# ---------------------------------------------------------------------------
# cost matrices
# ---------------------------------------------------------------------------

def _raw_cost(x: np.ndarray, y: np.ndarray, kind: str) -> np.ndarray:
    if kind == "squared_euclidean":
        return cdist(x, y, "sqeuclidean")
    if kind == "neg_inner_product":
        return -(x @ y.T)
    raise ValidationError(f"unknown cost kind {kind!r}; expected one of {COST_KINDS}")


def cost_matrix(a: DiscreteMeasure, b: DiscreteMeasure, kind: str) -> np.ndarray:
    """Pairwise cost matrix between the supports of two measures.

    ``kind`` is ``"squared_euclidean"`` (entries |x_i - y_j|^2) or
    ``"neg_inner_product"`` (entries -<x_i, y_j>, so that minimizing the
    transport cost maximizes correlation).
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return _raw_cost(a.points, b.points, kind)


# ---------------------------------------------------------------------------
# exact transportation LP
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportPlan:
    """Coupling matrix together with the marginals it was asked to meet."""

    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        r = np.asarray(self.row_marginal, dtype=float)
        c = np.asarray(self.col_marginal, dtype=float)
        if m.ndim != 2 or m.shape != (r.shape[0], c.shape[0]):
            raise ValidationError("plan shape does not match marginals")
        if np.any(m < -1e-12):
            raise ValidationError("plan has negative mass")
        m = np.clip(m, 0.0, None)
        row_err = np.max(np.abs(m.sum(axis=1) - r))
        col_err = np.max(np.abs(m.sum(axis=0) - c))
        if max(row_err, col_err) > _MARGINAL_TOL:
            raise ValidationError(
                f"plan marginals off by {max(row_err, col_err):.3e} (> {_MARGINAL_TOL})"
            )
        for arr in (m, r, c):
            arr.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "row_marginal", r)
        object.__setattr__(self, "col_marginal", c)


@lru_cache(maxsize=64)
def _marginal_constraints(n: int, m: int) -> sparse.csr_matrix:
    """Equality-constraint matrix of the (n, m) transportation polytope."""
    var = np.arange(n * m)
    rows = np.concatenate([var // m, n + var % m])
    cols = np.concatenate([var, var])
    data = np.ones(2 * n * m)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n + m, n * m))


def _transport_lp(wa: np.ndarray, wb: np.ndarray, cost: np.ndarray):
    """Solve min <cost, P> over couplings of (wa, wb); returns (value, P).

    The solution is certified by the LP duality gap (<= 1e-7 relative);
    single-atom marginals short-circuit to the unique feasible plan.
    """
    n, m = cost.shape
    if n == 1:
        plan = wb[None, :].copy()
        return float(wb @ cost[0]), plan
    if m == 1:
        plan = wa[:, None].copy()
        return float(wa @ cost[:, 0]), plan
    b_eq = np.concatenate([wa, wb])
    a_eq = _marginal_constraints(n, m)
    res = linprog(
        cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
        method="highs", options={"presolve": False},
    )
    if res.status != 0:
        res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"transport LP failed (status {res.status}): {res.message}")
    dual = res.eqlin.marginals
    gap = abs(res.fun - float(b_eq @ dual))
    if gap > _DUALITY_GAP_TOL * max(1.0, abs(res.fun)):
        raise SolverError(f"transport LP duality gap {gap:.3e} exceeds certificate")
    plan = np.clip(res.x.reshape(n, m), 0.0, None)
    return float(res.fun), plan


def emd(a: DiscreteMeasure, b: DiscreteMeasure, cost: np.ndarray) -> tuple[float, TransportPlan]:
    """Exact optimal transport for an arbitrary cost matrix.

    Returns ``(value, plan)`` where ``value`` is ``sum(cost * plan.matrix)``
    recomputed from the returned plan and the plan's marginals reproduce the
    input weights within 1e-7.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (a.n_atoms, b.n_atoms):
        raise ValidationError(
            f"cost shape {cost.shape} does not match supports "
            f"({a.n_atoms}, {b.n_atoms})"
        )
    if not np.all(np.isfinite(cost)):
        raise ValidationError("cost matrix must be finite")
    value, plan = _transport_lp(a.weights, b.weights, cost)
    recomputed = float(np.sum(cost * plan))
    if abs(recomputed - value) > 1e-9 * max(1.0, abs(value)):
        raise SolverError(
            f"LP objective {value!r} disagrees with plan cost {recomputed!r}"
        )
    return recomputed, TransportPlan(plan, a.weights.copy(), b.weights.copy())


# ---------------------------------------------------------------------------
# 1D exact fast path (monotone / comonotone coupling)
# ---------------------------------------------------------------------------

def _monotone_value_1d(xa, wa, xb, wb, kind: str) -> float:
    """Exact 1D transport value via the quantile coupling.

    For costs satisfying the Monge condition (both squared distance and
    negative inner product do) the optimal coupling pairs quantiles, so the
    value is an integral over [0, 1] of the cost along the two quantile
    functions; it is computed segment-by-segment on the merged CDF
    breakpoints.
    """
    ia = np.argsort(xa, kind="stable")
    ib = np.argsort(xb, kind="stable")
    xs_a, ws_a = xa[ia], wa[ia]
    xs_b, ws_b = xb[ib], wb[ib]
    ca = np.cumsum(ws_a)[:-1]
    cb = np.cumsum(ws_b)[:-1]
    bounds = np.concatenate([[0.0], ca, cb, [1.0]])
    bounds.sort(kind="stable")
    lengths = np.diff(bounds)
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    qa = xs_a[np.searchsorted(ca, mids, side="right")]
    qb = xs_b[np.searchsorted(cb, mids, side="right")]
    if kind == "squared_euclidean":
        seg = (qa - qb) ** 2
    else:
        seg = -(qa * qb)
    return float(lengths @ seg)


def w2_squared(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Squared 2-Wasserstein distance between two discrete measures."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.dim == 1:
        return _monotone_value_1d(
            a.points[:, 0], a.weights, b.points[:, 0], b.weights, "squared_euclidean"
        )
    value, _ = _transport_lp(a.weights, b.weights, cost_matrix(a, b, "squared_euclidean"))
    return value


def correlation_cost(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Maximal correlation sup_pi int <x, y> dpi over couplings of (a, b).

    Equals minus the optimal transport value under the negative inner
    product cost and satisfies the polarization identity
    ``C(a, b) = (m2(a) + m2(b) - w2_squared(a, b)) / 2``.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.dim == 1:
        return -_monotone_value_1d(
            a.points[:, 0], a.weights, b.points[:, 0], b.weights, "neg_inner_product"
        )
    value, _ = _transport_lp(a.weights, b.weights, cost_matrix(a, b, "neg_inner_product"))
    return -value


# ---------------------------------------------------------------------------
# Sinkhorn (entropic regularization)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SinkhornConfig:
    """Entropic-OT settings: regularizer, iteration cap, marginal tolerance."""

    reg: float
    max_iters: int = 5000
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.reg <= 0:
            raise ValidationError("reg must be > 0")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")


def _round_to_marginals(plan: np.ndarray, wa: np.ndarray, wb: np.ndarray) -> np.ndarray:
    """Project an approximate coupling onto exact marginals (rescale + residual)."""
    row = plan.sum(axis=1)
    plan = plan * np.where(row > 0, np.minimum(1.0, wa / np.where(row > 0, row, 1.0)), 0.0)[:, None]
    col = plan.sum(axis=0)
    plan = plan * np.where(col > 0, np.minimum(1.0, wb / np.where(col > 0, col, 1.0)), 0.0)[None, :]
    ra = wa - plan.sum(axis=1)
    rb = wb - plan.sum(axis=0)
    ra = np.clip(ra, 0.0, None)
    rb = np.clip(rb, 0.0, None)
    total = ra.sum()
    if total > 0:
        plan = plan + np.outer(ra, rb) / total
    return plan


def sinkhorn(
    a: DiscreteMeasure, b: DiscreteMeasure, cost: np.ndarray, config: SinkhornConfig
) -> tuple[float, TransportPlan]:
    """Entropically regularized transport, rounded back to exact marginals.

    Returns the transport part ``sum(cost * plan)`` of the objective and the
    rounded plan.  Iterations run in the log domain whenever the regularizer
    is small relative to the cost scale (reg < 1e-2 * median positive cost);
    non-convergence within ``config.max_iters`` issues a warning and returns
    the best iterate.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (a.n_atoms, b.n_atoms):
        raise ValidationError("cost shape does not match supports")
    wa, wb = a.weights, b.weights
    # drop zero-mass atoms for the iterations; reinsert as empty rows/cols
    pos_a = wa > 0
    pos_b = wb > 0
    sa, sb = wa[pos_a], wb[pos_b]
    m_sub = cost[np.ix_(pos_a, pos_b)]
    positive = m_sub[m_sub > 0]
    scale = float(np.median(positive)) if positive.size else float(np.median(np.abs(m_sub)) or 1.0)
    log_domain = config.reg < 1e-2 * scale
    reg = config.reg

    converged = False
    if not log_domain:
        kernel = np.exp(-m_sub / reg)
        u = np.ones_like(sa)
        v = np.ones_like(sb)
        for it in range(config.max_iters):
            ku = kernel.T @ u
            if np.any(ku <= 0) or not np.all(np.isfinite(ku)):
                log_domain = True  # underflow: redo in log domain
                break
            v = sb / ku
            kv = kernel @ v
            u = sa / kv
            if it % 10 == 0 or it == config.max_iters - 1:
                plan_sub = u[:, None] * kernel * v[None, :]
                err = max(
                    np.max(np.abs(plan_sub.sum(axis=1) - sa)),
                    np.max(np.abs(plan_sub.sum(axis=0) - sb)),
                )
                if err < config.tolerance:
                    converged = True
                    break
        if not log_domain:
            plan_sub = u[:, None] * kernel * v[None, :]

    if log_domain:
        f = np.zeros_like(sa)
        g = np.zeros_like(sb)
        log_a = np.log(sa)
        log_b = np.log(sb)
        converged = False
        for it in range(config.max_iters):
            g = reg * (log_b - logsumexp((f[:, None] - m_sub) / reg, axis=0))
            f = reg * (log_a - logsumexp((g[None, :] - m_sub) / reg, axis=1))
            if it % 10 == 0 or it == config.max_iters - 1:
                plan_sub = np.exp((f[:, None] + g[None, :] - m_sub) / reg)
                err = max(
                    np.max(np.abs(plan_sub.sum(axis=1) - sa)),
                    np.max(np.abs(plan_sub.sum(axis=0) - sb)),
                )
                if err < config.tolerance:
                    converged = True
                    break
        plan_sub = np.exp((f[:, None] + g[None, :] - m_sub) / reg)

    if not converged:
        warnings.warn(
            f"sinkhorn did not reach marginal tolerance {config.tolerance:.1e} "
            f"in {config.max_iters} iterations",
            RuntimeWarning,
            stacklevel=2,
        )
        logger.warning("sinkhorn non-convergence: reg=%g max_iters=%d", reg, config.max_iters)

    plan_sub = _round_to_marginals(plan_sub, sa, sb)
    plan = np.zeros_like(cost)
    plan[np.ix_(pos_a, pos_b)] = plan_sub
    value = float(np.sum(cost * plan))
    return value, TransportPlan(plan, wa.copy(), wb.copy())


# ---------------------------------------------------------------------------
# disintegration and barycenter
# ---------------------------------------------------------------------------

def barycentric_projection(
    plan: TransportPlan, source_points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Conditional means of the first marginal given each second-marginal atom.

    For column j with positive mass the projection is
    ``xbar_j = sum_i x_i * plan[i, j] / sum_i plan[i, j]``.  Columns with zero
    mass are skipped (their indices are simply absent from the result).

    Returns
    -------
    (kept, means)
        ``kept`` is the array of column indices with positive mass and
        ``means`` the corresponding (len(kept), dim) conditional means.
    """
    pts = np.asarray(source_points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] != plan.matrix.shape[0]:
        raise ValidationError("source_points do not match the plan's rows")
    col_mass = plan.matrix.sum(axis=0)
    kept = np.flatnonzero(col_mass > 0)
    skipped = col_mass.shape[0] - kept.shape[0]
    if skipped:
        logger.warning("barycentric projection skipped %d zero-mass columns", skipped)
    means = (plan.matrix[:, kept].T @ pts) / col_mass[kept, None]
    return kept, means


def barycenter_1d(
    a: DiscreteMeasure, b: DiscreteMeasure, grid: BallGrid
) -> DiscreteMeasure:
    """W2 barycenter (equal weights) of two histograms on a shared 1D grid.

    Solves a single LP over two couplings constrained to share their second
    marginal ``r``: minimize W2^2(a, r) + W2^2(r, b) with r supported on the
    grid.  Both inputs must already live on the grid's nodes.
    """
    if grid.dim != 1 or a.dim != 1 or b.dim != 1:
        raise DimensionError("barycenter_1d requires 1D measures on a 1D grid")
    nodes = grid.nodes
    g = grid.n_nodes
    for m in (a, b):
        if m.n_atoms != g or not np.allclose(m.points, nodes, atol=1e-12):
            raise ValidationError("measures must be histograms on the given grid")
    m_cost = _raw_cost(nodes, nodes, "squared_euclidean").ravel()
    # variables: [vec(P_a) | vec(P_b) | r]
    n_var = 2 * g * g + g
    var = np.arange(g * g)
    rows_a = var // g          # row sums of P_a = a
    rows_r1 = g + var % g      # col sums of P_a - r = 0
    rows_b = 2 * g + var // g  # row sums of P_b = b
    rows_r2 = 3 * g + var % g  # col sums of P_b - r = 0
    coo_rows = np.concatenate([rows_a, rows_r1, rows_b, rows_r2,
                               g + np.arange(g), 3 * g + np.arange(g)])
    coo_cols = np.concatenate([var, var, g * g + var, g * g + var,
                               2 * g * g + np.arange(g), 2 * g * g + np.arange(g)])
    coo_data = np.concatenate([np.ones(4 * g * g), -np.ones(2 * g)])
    a_eq = sparse.csr_matrix((coo_data, (coo_rows, coo_cols)), shape=(4 * g, n_var))
    b_eq = np.concatenate([a.weights, np.zeros(g), b.weights, np.zeros(g)])
    c = np.concatenate([m_cost, m_cost, np.zeros(g)])
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"barycenter LP failed (status {res.status}): {res.message}")
    gap = abs(res.fun - float(b_eq @ res.eqlin.marginals))
    if gap > _DUALITY_GAP_TOL * max(1.0, abs(res.fun)):
        raise SolverError(f"barycenter LP duality gap {gap:.3e} exceeds certificate")
    r = np.clip(res.x[2 * g * g :], 0.0, None)
    return DiscreteMeasure(nodes, r / r.sum())

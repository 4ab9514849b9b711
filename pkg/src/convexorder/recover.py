"""Recover the separating convex potential from an optimal transport plan.

The witness route produces a coupling between the second measure ``nu``
and the minimizing ball measure ``rho``; conditioning that plan on a
``nu`` atom and averaging gives a gradient estimate at that atom.  In 1D
the potential follows by smoothing and quadrature.  In 2D the gradient
field is rasterized onto a regular grid and the potential solves a
Poisson problem with Neumann data, discretized with a cell-centered
five-point scheme and a single Lagrange multiplier to pin the constant
mode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import spsolve
from scipy.spatial import Delaunay, QhullError, cKDTree
from statsmodels.nonparametric.smoothers_lowess import lowess

from .errors import (
    DegenerateDomainError,
    DimensionError,
    SingularSystemError,
    SpanTooSmallError,
    ValidationError,
)
from .measures import DiscreteMeasure
from .transport import TransportPlan, barycentric_projection

logger = logging.getLogger(__name__)

NORMALIZATIONS = ("anchored_at_min", "zero_mean")

# (+x, -x, +y, -y) neighbor offsets for the cell-centered stencil.
_FACE_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _locked(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GradientField:
    """Gradient estimates attached to anchor points."""

    anchors: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        anchors = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if anchors.shape != values.shape:
            raise ValidationError(
                f"anchors {anchors.shape} and values {values.shape} disagree"
            )
        if anchors.shape[0] == 0:
            raise ValidationError("empty gradient field")
        if not np.isfinite(values).all() or not np.isfinite(anchors).all():
            raise ValidationError("gradient field contains non-finite entries")
        object.__setattr__(self, "anchors", _locked(anchors))
        object.__setattr__(self, "values", _locked(values))

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    @property
    def n_anchors(self) -> int:
        return self.anchors.shape[0]


@dataclass(frozen=True)
class ScalarField:
    """Potential values at anchor points, defined up to the stated gauge."""

    anchors: np.ndarray
    values: np.ndarray
    normalization: str

    def __post_init__(self):
        anchors = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        values = np.asarray(self.values, dtype=float).ravel()
        if anchors.shape[0] != values.shape[0]:
            raise ValidationError("anchor/value count mismatch")
        if self.normalization not in NORMALIZATIONS:
            raise ValidationError(f"unknown normalization {self.normalization!r}")
        if not np.isfinite(values).all():
            raise ValidationError("scalar field contains non-finite values")
        object.__setattr__(self, "anchors", _locked(anchors))
        object.__setattr__(self, "values", _locked(values))

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]


@dataclass(frozen=True)
class PoissonProblem:
    """Discretized Neumann problem on a masked cell-centered grid.

    ``source`` already includes the uniform compatibility correction;
    the pre/post residuals record how large the correction was.
    """

    h: float
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray
    source: np.ndarray
    g_raster: np.ndarray
    boundary_faces: np.ndarray
    boundary_flux: np.ndarray
    compat_residual_pre: float
    compat_residual_post: float

    @property
    def n_cells(self) -> int:
        return int(self.mask.sum())

    def cell_centers(self) -> np.ndarray:
        gx, gy = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.column_stack([gx[self.mask], gy[self.mask]])


def gradient_from_plan(
    nu: DiscreteMeasure, rho: DiscreteMeasure, plan: TransportPlan
) -> GradientField:
    """Conditional means of the plan, anchored at ``nu``'s atoms.

    The plan must couple ``rho`` (rows) with ``nu`` (columns).  Columns
    carrying no mass produce no anchor and are reported via the log.
    """
    if nu.dim != rho.dim:
        raise DimensionError(f"dim mismatch: nu {nu.dim}, rho {rho.dim}")
    matrix = plan.matrix
    if matrix.shape != (rho.n_atoms, nu.n_atoms):
        raise ValidationError(
            f"plan shape {matrix.shape} does not couple rho ({rho.n_atoms}) "
            f"with nu ({nu.n_atoms})"
        )
    if not np.allclose(matrix.sum(axis=1), rho.weights, atol=1e-7):
        raise ValidationError("plan rows do not reproduce rho's weights")
    if not np.allclose(matrix.sum(axis=0), nu.weights, atol=1e-7):
        raise ValidationError("plan columns do not reproduce nu's weights")
    kept, means = barycentric_projection(plan, rho.points)
    if len(kept) < nu.n_atoms:
        logger.info(
            "gradient_from_plan: %d of %d target atoms had zero plan mass",
            nu.n_atoms - len(kept), nu.n_atoms,
        )
    return GradientField(anchors=nu.points[kept], values=means)


def lowess_smooth(field: GradientField, span: float = 0.3) -> GradientField:
    """Locally weighted linear smoothing of a 1D gradient field.

    Exactly linear inputs pass through unchanged; the window must hold
    at least three anchors.
    """
    if field.dim != 1:
        raise DimensionError("lowess smoothing is one-dimensional")
    if not 0.0 < span <= 1.0:
        raise ValidationError(f"span must lie in (0, 1], got {span}")
    if int(span * field.n_anchors) < 3:
        raise SpanTooSmallError(
            f"span {span} covers fewer than 3 of {field.n_anchors} anchors"
        )
    x = field.anchors.ravel()
    # it=0: the robustness iterations break the contraction contract — with a
    # single spike on otherwise clean data the median residual is zero, the
    # spike keeps weight only in its own local fit, and it passes through
    # unsmoothed.  Plain locally weighted regression pulls it in.
    smoothed = lowess(field.values.ravel(), x, frac=span, it=0, return_sorted=False)
    return GradientField(anchors=field.anchors, values=smoothed.reshape(-1, 1))


def integrate_1d(field: GradientField) -> ScalarField:
    """Trapezoid integral of a 1D gradient field, anchored at the minimum.

    Anchors are returned in increasing order with value 0 at the smallest
    anchor; the rule is exact whenever the integrand is piecewise linear
    between anchors.
    """
    if field.dim != 1:
        raise DimensionError("integrate_1d needs a one-dimensional field")
    if field.n_anchors < 2:
        raise DegenerateDomainError("cannot integrate a single-anchor field")
    order = np.argsort(field.anchors.ravel(), kind="stable")
    xs = field.anchors.ravel()[order]
    vs = field.values.ravel()[order]
    vals = cumulative_trapezoid(vs, xs, initial=0.0)
    return ScalarField(
        anchors=xs.reshape(-1, 1), values=vals, normalization="anchored_at_min"
    )


def _idw_eval(tree: cKDTree, values: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Inverse-distance interpolation from the 4 nearest anchors."""
    k = min(4, tree.n)
    dist, idx = tree.query(query, k=k)
    dist = np.atleast_2d(dist)
    idx = np.atleast_2d(idx)
    weights = 1.0 / np.maximum(dist, 1e-12)
    weights /= weights.sum(axis=1, keepdims=True)
    out = np.einsum("qk,qkd->qd", weights, values[idx])
    exact = dist[:, 0] < 1e-12
    if exact.any():
        out[exact] = values[idx[exact, 0]]
    return out


def assemble_poisson(field: GradientField, h: float) -> PoissonProblem:
    """Rasterize a scattered 2D gradient field into a Neumann problem.

    Cells of spacing ``h`` cover the anchors' bounding box padded by one
    cell; a cell belongs to the domain when its center falls inside the
    anchors' convex hull.  The divergence source per cell is the centered
    difference of face-midpoint samples of the rasterized field (the
    Gauss form: net outflux over cell area), boundary fluxes take the
    same face-midpoint samples, and the compatibility defect — already
    near roundoff because interior faces cancel pairwise — is subtracted
    uniformly from the source so the discrete system is solvable.
    """
    if field.dim != 2:
        raise DimensionError("assemble_poisson needs a two-dimensional field")
    if field.n_anchors < 8:
        raise ValidationError("need at least 8 anchors to form a 2D domain")
    if h <= 0:
        raise ValidationError(f"grid spacing must be positive, got {h}")
    anchors = field.anchors
    try:
        hull = Delaunay(anchors)
    except QhullError as exc:
        raise DegenerateDomainError(f"anchors do not span a 2D region: {exc}") from exc

    lo = anchors.min(axis=0) - h
    hi = anchors.max(axis=0) + h
    nx = max(int(np.ceil((hi[0] - lo[0]) / h)), 3)
    ny = max(int(np.ceil((hi[1] - lo[1]) / h)), 3)
    if nx * ny > 4_000_000:
        raise ValidationError(f"grid {nx}x{ny} too fine for spacing {h}")
    xs = lo[0] + (np.arange(nx) + 0.5) * h
    ys = lo[1] + (np.arange(ny) + 0.5) * h
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    centers = np.column_stack([gx.ravel(), gy.ravel()])

    mask = (hull.find_simplex(centers) >= 0).reshape(nx, ny)
    if not mask.any():
        raise DegenerateDomainError("no cell center lies inside the anchor hull")

    tree = cKDTree(anchors)
    g_raster = _idw_eval(tree, field.values, centers).reshape(nx, ny, 2)

    cells = np.argwhere(mask)
    n_cells = cells.shape[0]
    cell_xy = np.column_stack([xs[cells[:, 0]], ys[cells[:, 1]]])
    boundary_faces = np.zeros((n_cells, 4), dtype=bool)
    face_flux = np.zeros((n_cells, 4))
    for f, (di, dj) in enumerate(_FACE_OFFSETS):
        ni = cells[:, 0] + di
        nj = cells[:, 1] + dj
        inside = (0 <= ni) & (ni < nx) & (0 <= nj) & (nj < ny)
        neighbor_in = np.zeros(n_cells, dtype=bool)
        neighbor_in[inside] = mask[ni[inside], nj[inside]]
        boundary_faces[:, f] = ~neighbor_in
        midpoints = cell_xy + 0.5 * h * np.array([di, dj])
        g_face = _idw_eval(tree, field.values, midpoints)
        face_flux[:, f] = g_face[:, 0] * di + g_face[:, 1] * dj

    boundary_flux = np.where(boundary_faces, face_flux, 0.0)
    source = np.zeros((nx, ny))
    source[mask] = face_flux.sum(axis=1) / h
    integral_div = float(source.sum() * h * h)
    integral_flux = float(boundary_flux[boundary_faces].sum() * h)
    defect = integral_div - integral_flux
    scale = max(1.0, abs(integral_div), abs(integral_flux))
    source = np.where(mask, source - defect / (n_cells * h * h), 0.0)
    residual_post = float(source.sum() * h * h - integral_flux)

    logger.debug(
        "assemble_poisson: %dx%d grid, %d cells, compatibility defect %.3e",
        nx, ny, n_cells, defect,
    )
    if abs(residual_post) > 1e-6 * scale:
        raise DegenerateDomainError(
            f"compatibility residual {residual_post!r} survives correction"
        )
    return PoissonProblem(
        h=float(h),
        xs=xs,
        ys=ys,
        mask=mask,
        source=source,
        g_raster=g_raster,
        boundary_faces=boundary_faces,
        boundary_flux=boundary_flux,
        compat_residual_pre=float(defect),
        compat_residual_post=residual_post,
    )


def solve_poisson_neumann(problem: PoissonProblem) -> ScalarField:
    """Solve the masked five-point system with a zero-mean constraint.

    The pure-Neumann operator is singular; one Lagrange multiplier pins
    the constant mode, which lands the solution exactly on the zero-mean
    gauge.  The unconstrained residual is verified before returning.
    """
    mask = problem.mask
    h = problem.h
    nx, ny = mask.shape
    index = -np.ones(mask.shape, dtype=int)
    cells = np.argwhere(mask)
    n = cells.shape[0]
    index[mask] = np.arange(n)

    rows, cols, vals = [], [], []
    b = np.empty(n)
    for c, (i, j) in enumerate(cells):
        diag = 0.0
        for f, (di, dj) in enumerate(_FACE_OFFSETS):
            if problem.boundary_faces[c, f]:
                continue
            nb = index[i + di, j + dj]
            rows.append(c)
            cols.append(nb)
            vals.append(1.0)
            diag -= 1.0
        rows.append(c)
        cols.append(c)
        vals.append(diag)
        flux = problem.boundary_flux[c, problem.boundary_faces[c]].sum()
        b[c] = problem.source[i, j] * h * h - flux * h

    laplacian = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    ones = np.ones((n, 1))
    system = sparse.bmat(
        [[laplacian, ones], [ones.T, None]], format="csc"
    )
    rhs = np.concatenate([b, [0.0]])
    solution = spsolve(system, rhs)
    if not np.isfinite(solution).all():
        raise SingularSystemError("Poisson system solve produced non-finite values")
    f = solution[:n]
    residual = np.abs(laplacian @ f - b).max()
    bound = 1e-8 * max(np.abs(b).max(), 1e-12)
    if residual > bound:
        raise SingularSystemError(
            f"Poisson residual {residual!r} exceeds {bound!r}"
        )
    gx, gy = np.meshgrid(problem.xs, problem.ys, indexing="ij")
    anchors = np.column_stack([gx[mask], gy[mask]])
    return ScalarField(anchors=anchors, values=f, normalization="zero_mean")


def _fill_grid(problem: PoissonProblem, field: ScalarField) -> np.ndarray:
    """Spread masked cell values onto the full grid for interpolation.

    Cells outside the domain copy their nearest in-domain neighbor so
    bilinear interpolation near the hull boundary has data on all four
    surrounding cells.
    """
    mask = problem.mask
    grid = np.zeros(mask.shape)
    grid[mask] = field.values
    outside = ~mask
    if outside.any():
        gx, gy = np.meshgrid(problem.xs, problem.ys, indexing="ij")
        inside_pts = np.column_stack([gx[mask], gy[mask]])
        outside_pts = np.column_stack([gx[outside], gy[outside]])
        _, nearest = cKDTree(inside_pts).query(outside_pts, k=1)
        grid[outside] = field.values[nearest]
    return grid


def recover_f(
    nu: DiscreteMeasure,
    rho: DiscreteMeasure,
    plan: TransportPlan,
    span: float = 0.3,
    h: float | None = None,
) -> tuple[GradientField, ScalarField]:
    """End-to-end potential recovery, dispatching on dimension.

    1D: smooth the gradient field, then integrate (value 0 at the
    smallest anchor).  2D: rasterize, solve the Neumann problem, and
    sample the zero-mean grid solution back at the gradient anchors by
    bilinear interpolation.
    """
    field = gradient_from_plan(nu, rho, plan)
    if field.dim == 1:
        if int(span * field.n_anchors) >= 3:
            field = lowess_smooth(field, span=span)
        else:
            logger.info(
                "recover_f: %d anchors give no usable smoothing window at "
                "span %.3g; integrating the raw field", field.n_anchors, span,
            )
        return field, integrate_1d(field)
    if field.dim == 2:
        if h is None:
            span_xy = field.anchors.max(axis=0) - field.anchors.min(axis=0)
            h = float(max(span_xy.max(), 1e-9) / 32.0)
        problem = assemble_poisson(field, h)
        grid_field = solve_poisson_neumann(problem)
        grid = _fill_grid(problem, grid_field)
        interp = RegularGridInterpolator(
            (problem.xs, problem.ys), grid, bounds_error=False, fill_value=None
        )
        values = interp(field.anchors)
        return field, ScalarField(
            anchors=field.anchors, values=values, normalization="zero_mean"
        )
    raise DimensionError(f"potential recovery supports d in {{1, 2}}, got {field.dim}")

"""Finitely supported measures, unit-ball grids, and Dirichlet weights.

The detection machinery only ever touches three kinds of objects: discrete
probability measures on R^d, lattice grids intersected with the closed unit
ball (the support candidates for witness measures), and Dirichlet draws that
turn box-constrained optimizer variables into simplex weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RejectionStallError, ValidationError

_WEIGHT_SUM_TOL = 1e-9
_BALL_TOL = 1e-12


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValidationError("points must be a nonempty (n, dim) array")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points must be finite")
    return pts


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure sum_i w_i * delta(x_i) with finite support.

    Weights must be nonnegative and sum to 1 within 1e-9; they are stored
    renormalized to sum exactly to 1 so downstream linear programs see
    consistent marginals.  Instances are immutable (arrays are write-locked).
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.points)
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != pts.shape[0]:
            raise ValidationError(
                f"weights shape {w.shape} does not match {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        if np.any(w < -1e-12):
            raise ValidationError("weights must be nonnegative")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValidationError(f"weights sum to {total!r}, expected 1 within 1e-9")
        w = w / total
        pts = pts.copy()
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_samples(cls, points) -> "DiscreteMeasure":
        """Empirical measure: uniform weights on the given sample points."""
        pts = _as_points(points)
        n = pts.shape[0]
        return cls(pts, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, point) -> "DiscreteMeasure":
        """Dirac measure at a single point."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        return cls(pt[None, :], np.array([1.0]))


@dataclass(frozen=True)
class BallGrid:
    """Lattice on [-1, 1]^dim intersected with the closed unit ball."""

    dim: int
    partitions_per_axis: int
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.dim:
            raise ValidationError("nodes must be a (g, dim) array")
        if np.any(np.linalg.norm(nodes, axis=1) > 1.0 + _BALL_TOL):
            raise ValidationError("grid nodes must lie in the closed unit ball")
        nodes = nodes.copy()
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class DirichletParams:
    """Concentration vector for a Dirichlet distribution (all entries > 0)."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim != 1 or a.shape[0] < 2:
            raise ValidationError("alpha must be a 1D vector of length >= 2")
        if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
            raise ValidationError("alpha entries must be finite and > 0")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    def __len__(self) -> int:
        return self.alpha.shape[0]


def make_ball_grid(dim: int, partitions_per_axis: int) -> BallGrid:
    """Uniform lattice on [-1, 1]^dim restricted to the closed unit ball.

    Parameters
    ----------
    dim : int
        Ambient dimension, one of {1, 2, 3}.
    partitions_per_axis : int
        Number of lattice values per axis (>= 2); the axis values are
        ``linspace(-1, 1, partitions_per_axis)``.
    """
    if dim not in (1, 2, 3):
        raise DimensionError(f"dim must be 1, 2, or 3, got {dim}")
    if partitions_per_axis < 2:
        raise ValidationError("partitions_per_axis must be >= 2")
    axis = np.linspace(-1.0, 1.0, partitions_per_axis)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    keep = np.linalg.norm(nodes, axis=1) <= 1.0 + _BALL_TOL
    return BallGrid(dim=dim, partitions_per_axis=partitions_per_axis, nodes=nodes[keep])


def sample_dirichlet(params: DirichletParams, rng_seed) -> np.ndarray:
    """One Dirichlet draw; deterministic given an integer seed.

    ``rng_seed`` may be an int (a fresh generator is created) or an existing
    ``numpy.random.Generator`` (its stream advances).
    """
    rng = np.random.default_rng(rng_seed)
    x = rng.dirichlet(params.alpha)
    # numpy normalizes gamma draws; the sum is 1 up to float roundoff.
    if abs(x.sum() - 1.0) > 1e-12:
        x = x / x.sum()
    return x


def measure_on_grid(grid: BallGrid, weights) -> DiscreteMeasure:
    """Attach simplex weights to the nodes of a ball grid."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (grid.n_nodes,):
        raise ValidationError(
            f"got {w.shape[0] if w.ndim == 1 else w.shape} weights for {grid.n_nodes} nodes"
        )
    return DiscreteMeasure(grid.nodes, w)


def direct_dirichlet_measure(
    params: DirichletParams, n_atoms: int, rng_seed
) -> DiscreteMeasure:
    """Random measure with uniform weights on sign-flipped Dirichlet atoms.

    Each atom is produced by drawing a (d+1)-dimensional Dirichlet vector,
    flipping every coordinate's sign independently with probability 1/2,
    dropping the last coordinate, and accepting the result if it lies in the
    closed unit ball.  (Acceptance is automatic for the Euclidean norm since
    the coordinates of a Dirichlet draw sum to one; the rejection step is kept
    as a guard for alternative norms or degraded numerics.)

    Raises
    ------
    RejectionStallError
        If the acceptance rate drops below 1e-3.
    """
    if n_atoms < 1:
        raise ValidationError("n_atoms must be >= 1")
    dim = len(params) - 1
    rng = np.random.default_rng(rng_seed)
    atoms = np.empty((n_atoms, dim))
    accepted = 0
    attempts = 0
    batch = max(n_atoms, 64)
    while accepted < n_atoms:
        draws = rng.dirichlet(params.alpha, size=batch)
        signs = np.where(rng.random((batch, len(params))) < 0.5, -1.0, 1.0)
        cand = (draws * signs)[:, :dim]
        ok = np.linalg.norm(cand, axis=1) <= 1.0 + _BALL_TOL
        attempts += batch
        good = cand[ok]
        take = min(n_atoms - accepted, good.shape[0])
        atoms[accepted : accepted + take] = good[:take]
        accepted += take
        if attempts >= 1000 and accepted / attempts < 1e-3:
            raise RejectionStallError(
                f"direct Dirichlet sampler accepted {accepted}/{attempts} draws"
            )
    return DiscreteMeasure(atoms, np.full(n_atoms, 1.0 / n_atoms))


def moments(measure: DiscreteMeasure) -> tuple[np.ndarray, float]:
    """Mean vector and scalar second moment sum_i w_i * |x_i|^2."""
    mean = measure.weights @ measure.points
    second = float(measure.weights @ np.sum(measure.points**2, axis=1))
    return mean, second

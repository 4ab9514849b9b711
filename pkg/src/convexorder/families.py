"""Measure families used by the experiment scripts and the test suite.

Three parametric pairs with known convex-order behavior:

* centered Gaussians N(0, sigma^2 I) vs N(0, I): ordered iff sigma <= 1;
* symmetric two-point laws (1+s)-scaled vs unit: ordered iff s <= 0;
* 2D four-point cross vs its (1+s)-scaled copy: ordered iff s >= 0
  (here the *second* measure carries the scaling).
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .measures import DiscreteMeasure


def gaussian_sample_pair(
    dim: int, sigma: float, n: int, seed
) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Empirical pair mu ~ N(0, sigma^2 I), nu ~ N(0, I), n atoms each."""
    if sigma < 0:
        raise ValidationError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    mu = DiscreteMeasure.from_samples(sigma * rng.standard_normal((n, dim)))
    nu = DiscreteMeasure.from_samples(rng.standard_normal((n, dim)))
    return mu, nu


def gaussian_histogram_pair(
    sigma: float, n_bins: int, n: int, seed
) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Binned 1D Gaussian samples on one shared grid of bin centers.

    Both sample sets are binned over the common range [-L, L] with
    L = max(|samples|), so the two histograms live on identical points
    (empty bins keep weight zero).
    """
    if n_bins < 2:
        raise ValidationError("n_bins must be >= 2")
    rng = np.random.default_rng(seed)
    x_mu = sigma * rng.standard_normal(n)
    x_nu = rng.standard_normal(n)
    lim = float(max(np.max(np.abs(x_mu)), np.max(np.abs(x_nu)))) * (1 + 1e-9)
    edges = np.linspace(-lim, lim, n_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    w_mu, _ = np.histogram(x_mu, bins=edges)
    w_nu, _ = np.histogram(x_nu, bins=edges)
    mu = DiscreteMeasure(centers[:, None], w_mu / n)
    nu = DiscreteMeasure(centers[:, None], w_nu / n)
    return mu, nu


def two_point_pair(s: float) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """mu = (delta_{-(1+s)} + delta_{1+s})/2 against nu = (delta_{-1} + delta_1)/2."""
    if s <= -1:
        raise ValidationError("s must be > -1")
    mu = DiscreteMeasure(np.array([[-(1.0 + s)], [1.0 + s]]), np.array([0.5, 0.5]))
    nu = DiscreteMeasure(np.array([[-1.0], [1.0]]), np.array([0.5, 0.5]))
    return mu, nu


def cross_pair_2d(s: float) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Four-point cross vs its (1+s)-scaled copy (scaling on the second law)."""
    if s <= -1:
        raise ValidationError("s must be > -1")
    cross = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])
    w = np.full(4, 0.25)
    mu = DiscreteMeasure(cross, w)
    nu = DiscreteMeasure((1.0 + s) * cross, w)
    return mu, nu

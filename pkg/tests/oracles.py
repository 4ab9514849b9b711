"""Independent reference computations that pin expected test values.

Everything here is deliberately naive: closed forms, exhaustive
enumeration, textbook quadrature.  The library must agree with these
within the tolerances stated in the tests; keeping both routes separate
is what catches a shared mistake.
"""

from __future__ import annotations

import itertools

import numpy as np


# ---------------------------------------------------------------------------
# transport: exhaustive matchings for uniform measures with equal atom counts
# ---------------------------------------------------------------------------

def emd_by_permutations(points_a: np.ndarray, points_b: np.ndarray) -> float:
    """Minimal mean squared displacement over all one-to-one matchings.

    Valid for uniform weights and equal atom counts, where an optimal
    coupling can always be taken to be a permutation.
    """
    a = np.atleast_2d(np.asarray(points_a, dtype=float))
    b = np.atleast_2d(np.asarray(points_b, dtype=float))
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("permutation oracle needs equal atom counts")
    best = np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(np.sum((a[i] - b[j]) ** 2) for i, j in enumerate(perm))
        best = min(best, total / n)
    return float(best)


def correlation_by_permutations(points_a: np.ndarray, points_b: np.ndarray) -> float:
    """Maximal mean inner product over all one-to-one matchings."""
    a = np.atleast_2d(np.asarray(points_a, dtype=float))
    b = np.atleast_2d(np.asarray(points_b, dtype=float))
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("permutation oracle needs equal atom counts")
    best = -np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(float(a[i] @ b[j]) for i, j in enumerate(perm))
        best = max(best, total / n)
    return float(best)


def gap_by_permutations(points_mu, points_nu, points_rho) -> float:
    """C(nu, rho) - C(mu, rho) via exhaustive matchings (uniform weights)."""
    return correlation_by_permutations(points_nu, points_rho) - (
        correlation_by_permutations(points_mu, points_rho)
    )


# ---------------------------------------------------------------------------
# recovery: sorted-sample pairing and analytic Poisson benchmarks
# ---------------------------------------------------------------------------

def monotone_gradient_map(samples_mu: np.ndarray, samples_nu: np.ndarray):
    """Pair sorted samples: the i-th smallest nu atom maps to the i-th
    smallest mu atom.  Returns (anchors, gradient values), both 1D.

    This is the quantile construction of the monotone coupling for equal
    counts and uniform weights; the gradient of the separating potential
    at a nu atom is the matched mu atom.
    """
    x = np.sort(np.asarray(samples_mu, dtype=float).ravel())
    y = np.sort(np.asarray(samples_nu, dtype=float).ravel())
    if x.size != y.size:
        raise ValueError("monotone map oracle needs equal sample counts")
    return y, x


def quadratic_form_potential(points: np.ndarray) -> np.ndarray:
    """x^2 + x*y + y^2 evaluated rowwise."""
    p = np.atleast_2d(points)
    return p[:, 0] ** 2 + p[:, 0] * p[:, 1] + p[:, 1] ** 2


def quadratic_form_gradient(points: np.ndarray) -> np.ndarray:
    """grad of x^2 + x*y + y^2: (2x + y, x + 2y)."""
    p = np.atleast_2d(points)
    return np.column_stack([2.0 * p[:, 0] + p[:, 1], p[:, 0] + 2.0 * p[:, 1]])


def radial_quartic_potential(points: np.ndarray) -> np.ndarray:
    """(x^2 + y^2)^2 — the five-point stencil has genuine O(h^2) error here."""
    p = np.atleast_2d(points)
    return (p[:, 0] ** 2 + p[:, 1] ** 2) ** 2


def radial_quartic_gradient(points: np.ndarray) -> np.ndarray:
    """grad of (x^2+y^2)^2: 4(x^2+y^2) * (x, y)."""
    p = np.atleast_2d(points)
    r2 = p[:, 0] ** 2 + p[:, 1] ** 2
    return 4.0 * r2[:, None] * p


def zero_mean(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values - values.mean()


# ---------------------------------------------------------------------------
# arbitrage: forward pricing of call sheets from a discrete law
# ---------------------------------------------------------------------------

def price_calls(points: np.ndarray, weights: np.ndarray, strikes: np.ndarray) -> np.ndarray:
    """C(K) = sum_i w_i * (x_i - K)^+ for each strike K."""
    x = np.asarray(points, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    ks = np.asarray(strikes, dtype=float).ravel()
    return np.array([float(w @ np.clip(x - k, 0.0, None)) for k in ks])


def quadratic_margin_two_point(s: float) -> float:
    """E_mu[x^2] - E_nu[x^2] for the stretched/plain two-point pair."""
    return (1.0 + s) ** 2 - 1.0


# ---------------------------------------------------------------------------
# portfolio simulation: direct summation benchmarks
# ---------------------------------------------------------------------------

def quadratic_variation_gamma(weights_path: np.ndarray) -> np.ndarray:
    """Cumulative sum of squared weight increments.

    For the generating function 1 - sum(x_i^2) the drift process equals
    the summed squared increments of the weight path, which this computes
    directly from the path with no knowledge of the strategy code.
    """
    w = np.asarray(weights_path, dtype=float)
    steps = np.sum(np.diff(w, axis=0) ** 2, axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def entropy_value(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(-(x * np.log(x)).sum())

"""Tree-structured Parzen estimator for box-constrained minimization.

The optimizer keeps a history of (point, loss) trials, splits it at the
gamma-quantile of the losses, fits per-coordinate truncated-Gaussian
kernel densities to the good and bad halves, and suggests the candidate
(among draws from the good density) with the best expected-improvement
score 1 / (gamma + (g/l) * (1 - gamma)).  Maximizing that score is the
same as minimizing the density ratio g/l.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ValidationError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TpeConfig:
    """Settings for the optimizer.

    ``bounds`` is a sequence of (low, high) pairs, one per coordinate;
    ``gamma`` the quantile splitting good from bad trials; ``n_candidates``
    the number of draws scored per suggestion.  ``bandwidth_rule`` currently
    supports only Scott's rule.
    """

    bounds: tuple[tuple[float, float], ...]
    gamma: float = 0.25
    n_candidates: int = 24
    max_evals: int = 100
    bandwidth_rule: str = "scott"
    seed: int = 0

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ValidationError("bounds must be nonempty")
        for lo, hi in bounds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValidationError(f"invalid bound ({lo}, {hi})")
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError("gamma must lie in (0, 1)")
        if self.n_candidates < 1 or self.max_evals < 1:
            raise ValidationError("n_candidates and max_evals must be >= 1")
        if self.bandwidth_rule != "scott":
            raise ValidationError(f"unknown bandwidth rule {self.bandwidth_rule!r}")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def lows(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    def highs(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])


@dataclass
class TrialHistory:
    """Record of evaluated points and their losses, in evaluation order."""

    points: list = field(default_factory=list)
    losses: list = field(default_factory=list)

    def append(self, point: np.ndarray, loss: float) -> None:
        self.points.append(np.asarray(point, dtype=float))
        self.losses.append(float(loss))

    def __len__(self) -> int:
        return len(self.losses)

    def points_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def losses_array(self) -> np.ndarray:
        return np.asarray(self.losses, dtype=float)

    def running_min(self) -> np.ndarray:
        return np.minimum.accumulate(self.losses_array())


class _TruncatedKde1d:
    """Mixture of Gaussians truncated (and renormalized) to [lo, hi]."""

    def __init__(self, centers: np.ndarray, lo: float, hi: float):
        self.centers = np.asarray(centers, dtype=float)
        self.lo = lo
        self.hi = hi
        span = hi - lo
        k = self.centers.shape[0]
        # Scott's rule with the robust scale min(std, IQR/1.349).  The robust
        # scale matters for the optimizer: once rejected trials pile up around
        # an over-exploited cluster, the bad density's IQR collapses and its
        # kernels sharpen there, which is what pushes candidates elsewhere.
        sd = float(np.std(self.centers, ddof=1)) if k > 1 else 0.0
        iqr = float(np.subtract(*np.percentile(self.centers, [75, 25])))
        scale = min(sd, iqr / 1.349)
        if not np.isfinite(scale) or scale < 1e-12 * max(span, 1.0):
            scale = 0.1 * span  # degenerate cluster: fall back to a fixed spread
        h = 1.059 * scale * k ** (-0.2)
        self.h = max(h, 1e-3 * span)
        z_lo = ndtr((lo - self.centers) / self.h)
        z_hi = ndtr((hi - self.centers) / self.h)
        self._z_lo = z_lo
        self._mass = np.clip(z_hi - z_lo, 1e-300, None)

    def logpdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = (x[:, None] - self.centers[None, :]) / self.h
        log_kernel = -0.5 * z * z - _LOG_SQRT_2PI - math.log(self.h)
        log_kernel = log_kernel - np.log(self._mass)[None, :]
        mx = log_kernel.max(axis=1)
        out = mx + np.log(np.mean(np.exp(log_kernel - mx[:, None]), axis=1))
        return out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.integers(0, self.centers.shape[0], size=n)
        u = rng.random(n)
        lo_p = self._z_lo[idx]
        mass = self._mass[idx]
        p = np.clip(lo_p + u * mass, 1e-12, 1.0 - 1e-12)
        x = self.centers[idx] + self.h * ndtri(p)
        return np.clip(x, self.lo, self.hi)


@dataclass(frozen=True)
class DensityPair:
    """Per-coordinate truncated-Gaussian KDEs over good and bad trials."""

    good: tuple
    bad: tuple

    @classmethod
    def fit(cls, good_pts: np.ndarray, bad_pts: np.ndarray, config: TpeConfig) -> "DensityPair":
        good = tuple(
            _TruncatedKde1d(good_pts[:, i], *config.bounds[i]) for i in range(config.dim)
        )
        bad = tuple(
            _TruncatedKde1d(bad_pts[:, i], *config.bounds[i]) for i in range(config.dim)
        )
        return cls(good=good, bad=bad)

    def log_good(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return sum(kde.logpdf(x[:, i]) for i, kde in enumerate(self.good))

    def log_bad(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return sum(kde.logpdf(x[:, i]) for i, kde in enumerate(self.bad))


def ei_score(candidate: np.ndarray, densities: DensityPair, gamma: float) -> float:
    """Expected-improvement score 1 / (gamma + (g/l) * (1 - gamma)).

    ``l`` is the good density and ``g`` the bad density at the candidate;
    the score is strictly decreasing in the ratio g/l, so the best candidate
    is the one the good density favors most relative to the bad one.
    """
    cand = np.atleast_2d(np.asarray(candidate, dtype=float))
    log_l = densities.log_good(cand)
    log_g = densities.log_bad(cand)
    ratio = np.exp(np.clip(log_g - log_l, -700.0, 700.0))
    return float((1.0 / (gamma + ratio * (1.0 - gamma)))[0])


def _uniform_draw(config: TpeConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(config.lows(), config.highs())


def suggest(history: TrialHistory, config: TpeConfig, rng: np.random.Generator) -> np.ndarray:
    """Next point to evaluate.

    Falls back to a uniform prior draw while the history holds fewer than
    2/gamma finite-loss trials (or when the quantile split degenerates,
    e.g. under constant losses).  Otherwise draws ``n_candidates`` points
    from the good density and returns the one with the highest EI score,
    ties broken by the lowest candidate index.
    """
    losses = history.losses_array()
    finite = np.isfinite(losses)
    n_finite = int(finite.sum())
    if n_finite < math.ceil(2.0 / config.gamma):
        return _uniform_draw(config, rng)
    pts = history.points_array()[finite]
    fl = losses[finite]
    y_star = float(np.quantile(fl, config.gamma))
    good_mask = fl < y_star
    if not good_mask.any() or good_mask.all():
        return _uniform_draw(config, rng)
    densities = DensityPair.fit(pts[good_mask], pts[~good_mask], config)
    candidates = np.column_stack(
        [kde.sample(config.n_candidates, rng) for kde in densities.good]
    )
    log_l = densities.log_good(candidates)
    log_g = densities.log_bad(candidates)
    ratio = np.exp(np.clip(log_g - log_l, -700.0, 700.0))
    scores = 1.0 / (config.gamma + ratio * (1.0 - config.gamma))
    return candidates[int(np.argmax(scores))]


@dataclass(frozen=True)
class TpeResult:
    best_point: np.ndarray
    best_loss: float
    history: TrialHistory


def minimize(objective, config: TpeConfig) -> TpeResult:
    """Run exactly ``config.max_evals`` objective evaluations.

    Non-finite objective values are recorded as +inf (and excluded from the
    density fits) rather than aborting the run.  The returned history allows
    recomputing the running minimum per evaluation.
    """
    rng = np.random.default_rng(config.seed)
    history = TrialHistory()
    for _ in range(config.max_evals):
        point = suggest(history, config, rng)
        try:
            raw = objective(point)
        except FloatingPointError:
            raw = math.inf
        loss = float(raw)
        if not math.isfinite(loss):
            loss = math.inf
        history.append(point, loss)
    losses = history.losses_array()
    finite = np.isfinite(losses)
    if finite.any():
        best_idx = int(np.flatnonzero(finite)[np.argmin(losses[finite])])
        best_loss = float(losses[best_idx])
    else:
        best_idx = 0
        best_loss = math.inf
    return TpeResult(
        best_point=history.points[best_idx], best_loss=best_loss, history=history
    )

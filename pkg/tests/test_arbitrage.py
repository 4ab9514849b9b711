"""Call-sheet extraction, strategy construction, and payoff verification."""
import warnings

import numpy as np
import pytest

from convexorder.arbitrage import (
    ArbitrageStrategy,
    CallSheet,
    bl_extract,
    build_strategy,
    payoff,
    verify_strategy,
)
from convexorder.errors import (
    ArbitrageInSheetError,
    DimensionError,
    ExtrapolationWarning,
    InsufficientStrikesError,
    NoArbitrageMarginError,
    ValidationError,
)
from convexorder.families import two_point_pair
from convexorder.measures import DiscreteMeasure
from convexorder.order import OrderSearchConfig, estimate_v
from convexorder.recover import GradientField, ScalarField, recover_f
from convexorder.transport import cost_matrix, emd
from oracles import price_calls, quadratic_margin_two_point


def _sheet(strikes, points, weights, maturity="T"):
    prices = price_calls(points, weights, strikes)
    return CallSheet(maturity=maturity, strikes=strikes, prices=prices)


def _tv(measure, points, weights):
    lookup = {float(p): w for p, w in zip(points, weights)}
    drift = 0.0
    for atom, w in zip(measure.points[:, 0], measure.weights):
        drift += abs(w - lookup.pop(float(atom), 0.0))
    return drift + sum(abs(w) for w in lookup.values())


def _quadratic_fields(lo=-2.0, hi=2.0, n=81):
    x = np.linspace(lo, hi, n)
    values = x ** 2 - np.mean(x ** 2)
    f = ScalarField(anchors=x[:, None], values=values, normalization="zero_mean")
    grad = GradientField(anchors=x[:, None], values=(2 * x)[:, None])
    return f, grad


def _example2_strategy():
    mu, nu = two_point_pair(0.5)
    f, grad = _quadratic_fields()
    return mu, nu, build_strategy(mu, nu, f, grad)


class TestCallSheet:
    def test_count_mismatch(self):
        with pytest.raises(ValidationError):
            CallSheet("T", np.array([1.0, 2.0]), np.array([1.0]))

    def test_needs_two_strikes(self):
        with pytest.raises(InsufficientStrikesError):
            CallSheet("T", np.array([1.0]), np.array([1.0]))

    def test_strikes_strictly_increasing(self):
        with pytest.raises(ValidationError):
            CallSheet("T", np.array([1.0, 1.0, 2.0]), np.array([1.0, 0.5, 0.2]))

    def test_prices_nonnegative(self):
        with pytest.raises(ValidationError):
            CallSheet("T", np.array([1.0, 2.0]), np.array([0.5, -0.2]))

    def test_finite_entries(self):
        with pytest.raises(ValidationError):
            CallSheet("T", np.array([1.0, 2.0]), np.array([np.nan, 0.2]))


class TestBlExtract:
    def test_point_mass_recovered_from_kink(self):
        strikes = np.arange(80.0, 121.0, 10.0)
        law = bl_extract(_sheet(strikes, [100.0], [1.0]))
        assert law.n_atoms == 1
        assert law.points[0, 0] == 100.0
        assert law.weights[0] == pytest.approx(1.0, abs=1e-12)

    def test_two_point_law_roundtrip(self):
        strikes = np.arange(80.0, 121.0, 5.0)
        law = bl_extract(_sheet(strikes, [90.0, 110.0], [0.5, 0.5]))
        assert _tv(law, [90.0, 110.0], [0.5, 0.5]) <= 1e-9

    def test_random_laws_roundtrip(self, rng):
        strikes = np.linspace(50.0, 150.0, 41)
        interior = strikes[1:-1]
        for _ in range(10):
            k = int(rng.integers(2, 7))
            atoms = rng.choice(interior, size=k, replace=False)
            weights = rng.dirichlet(np.ones(k))
            law = bl_extract(_sheet(strikes, atoms, weights))
            assert _tv(law, atoms, weights) <= 1e-9
            assert np.all(law.weights >= 0)
            assert law.weights.sum() == pytest.approx(1.0, abs=1e-9)

    def test_mass_outside_grid_assigned_to_edges(self):
        strikes = np.arange(80.0, 121.0, 5.0)
        law = bl_extract(_sheet(strikes, [70.0, 110.0], [0.5, 0.5]))
        assert law.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert _tv(law, [85.0, 110.0], [0.5, 0.5]) <= 1e-9

    def test_increasing_prices_refused(self):
        sheet = CallSheet("T", np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.2, 0.5]))
        with pytest.raises(ArbitrageInSheetError):
            bl_extract(sheet)

    def test_concave_prices_refused(self):
        sheet = CallSheet(
            "T", np.array([0.0, 1.0, 2.0, 3.0]), np.array([2.0, 1.5, 0.5, 0.4])
        )
        with pytest.raises(ArbitrageInSheetError):
            bl_extract(sheet)

    def test_left_slope_steeper_than_forward_refused(self):
        sheet = CallSheet("T", np.array([0.0, 1.0, 2.0]), np.array([3.0, 1.5, 0.5]))
        with pytest.raises(ArbitrageInSheetError):
            bl_extract(sheet)

    def test_needs_three_strikes(self):
        sheet = CallSheet("T", np.array([1.0, 2.0]), np.array([1.0, 0.5]))
        with pytest.raises(InsufficientStrikesError):
            bl_extract(sheet)


class TestBuildStrategy:
    def test_quadratic_margin_on_scaled_two_point(self):
        mu, nu, strategy = _example2_strategy()
        assert strategy.margin == pytest.approx(quadratic_margin_two_point(0.5), abs=1e-12)
        assert strategy.cash_mu - strategy.cash_nu == pytest.approx(1.25, abs=1e-12)

    def test_same_law_refused(self):
        _, nu = two_point_pair(0.5)
        f, grad = _quadratic_fields()
        with pytest.raises(NoArbitrageMarginError):
            build_strategy(nu, nu, f, grad)

    def test_dimension_mismatch(self):
        mu, nu = two_point_pair(0.5)
        f, grad = _quadratic_fields()
        flat = DiscreteMeasure.point_mass(np.zeros(2))
        with pytest.raises(DimensionError):
            build_strategy(flat, nu, f, grad)

    def test_legs_follow_the_potential(self):
        _, _, strategy = _example2_strategy()
        x = np.array([[0.5], [1.0]])
        assert np.allclose(strategy.u1(x), -strategy.eval_f(x))
        assert np.allclose(strategy.u2(x), strategy.eval_f(x))
        assert np.allclose(strategy.delta(x), -2.0 * x, atol=1e-12)


class TestPayoff:
    def test_diagonal_pays_the_margin_exactly(self):
        mu, nu, strategy = _example2_strategy()
        for x in np.concatenate([mu.points, nu.points]):
            assert payoff(strategy, x, x) == pytest.approx(strategy.margin, abs=1e-12)

    def test_quadratic_arithmetic(self):
        _, _, strategy = _example2_strategy()
        got = payoff(strategy, np.array([0.0]), np.array([1.0]))
        assert got == pytest.approx(2.25, abs=1e-12)

    def test_convex_potential_floors_every_pair_at_margin(self, rng):
        # The potential is piecewise linear between anchors while the
        # gradient field is sampled exactly, so pairs falling inside one
        # 0.05-wide segment can undershoot the margin by at most the slope
        # mismatch times the step: h^2 with curvature 2.
        mu, nu, strategy = _example2_strategy()
        xs = rng.uniform(-1.8, 1.8, size=(60, 1))
        ys = rng.uniform(-1.8, 1.8, size=(60, 1))
        report = verify_strategy(strategy, mu, nu, pairs=(xs, ys))
        assert report.min_payoff >= strategy.margin - 0.05 ** 2

    def test_anchor_pairs_floor_exactly(self):
        mu, nu, strategy = _example2_strategy()
        anchors = strategy.potential.anchors
        report = verify_strategy(strategy, mu, nu, pairs=(anchors, anchors))
        assert report.min_payoff >= strategy.margin - 1e-9

    def test_extrapolation_flagged_but_valued(self):
        _, _, strategy = _example2_strategy()
        with pytest.warns(ExtrapolationWarning):
            vals = strategy.eval_f(np.array([[2.5]]))
        # linear continuation with the edge gradient: f(2) + f'(2) * 0.5
        f2 = strategy.eval_f(np.array([[2.0]]))[0]
        assert vals[0] == pytest.approx(f2 + 4.0 * 0.5, abs=1e-12)


class TestVerifyStrategy:
    def test_pass_with_diagonal_includes_margin(self):
        mu, _, strategy = _example2_strategy()
        report = verify_strategy(strategy, mu, mu, pairs=(mu.points, mu.points))
        assert report.passed
        assert report.min_payoff == pytest.approx(strategy.margin, abs=1e-9)

    def test_default_scan_covers_atom_product(self):
        mu, nu, strategy = _example2_strategy()
        report = verify_strategy(strategy, mu, nu)
        assert report.n_pairs == mu.n_atoms * nu.n_atoms
        assert report.passed
        assert report.min_payoff >= strategy.margin - 1e-9

    def test_wrong_sign_forward_leg_fails_the_scan(self):
        mu, nu, strategy = _example2_strategy()
        worst = np.inf
        for x in mu.points:
            for y in nu.points:
                fx = strategy.eval_f(x[None, :])[0]
                fy = strategy.eval_f(y[None, :])[0]
                gx = strategy.eval_grad(x[None, :])[0]
                flipped = strategy.margin + fy - fx + float(gx @ (y - x))
                worst = min(worst, flipped)
        assert worst < 0.0


class TestRecoveredPipeline:
    """End-to-end: search the witness, recover the potential, build the legs."""

    @staticmethod
    def _run(seed=0):
        mu, nu = two_point_pair(0.5)
        cfg = OrderSearchConfig(method="indirect_samples", grid_partitions=21,
                                max_evals=100, seed=seed)
        report = estimate_v(mu, nu, cfg)
        rho = report.witness_rho
        _, plan = emd(rho, nu, cost_matrix(rho, nu, "neg_inner_product"))
        field, pot = recover_f(nu, rho, plan)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExtrapolationWarning)
            strategy = build_strategy(mu, nu, pot, field)
        return mu, nu, report, strategy

    def test_margin_positive_and_substantial(self):
        mu, nu, report, strategy = self._run()
        assert strategy.margin > 0.2 * quadratic_margin_two_point(0.5)
        assert strategy.margin == pytest.approx(-report.v_estimate, abs=1e-9)

    @pytest.mark.xfail(
        strict=True,
        reason="the second law has two distinct atoms, so the recovered "
        "potential is flat between its two anchors and earns margin only "
        "through edge extrapolation — capped at 0.5 even for the exact "
        "optimal witness, below the 0.625 target",
    )
    def test_margin_captures_half_the_quadratic_benchmark(self):
        _, _, _, strategy = self._run()
        assert strategy.margin >= 0.5 * quadratic_margin_two_point(0.5)

    def test_resampled_pair_scan_stays_near_margin(self, rng):
        mu, nu, _, strategy = self._run()
        xs = mu.points[rng.integers(0, mu.n_atoms, size=100)]
        ys = nu.points[rng.integers(0, nu.n_atoms, size=100)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExtrapolationWarning)
            report = verify_strategy(strategy, mu, nu, pairs=(xs, ys))
        assert report.min_payoff >= 0.9 * strategy.margin

    def test_diagonal_drift_vanishes(self):
        mu, _, _, strategy = self._run()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExtrapolationWarning)
            drift = max(
                abs(payoff(strategy, x, x) - strategy.margin) for x in mu.points
            )
        assert drift <= 1e-9

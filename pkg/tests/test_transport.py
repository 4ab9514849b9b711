"""Exact and entropic transport against independent oracles.

The permutation oracle (tests/oracles.py) brute-forces couplings of
uniform measures; the barycenter oracle enumerates a weight mesh and
prices each candidate with an exact merged-CDF quantile formula.
"""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexorder.errors import DimensionError, ValidationError
from convexorder.measures import DiscreteMeasure, make_ball_grid, moments
from convexorder.transport import (
    SinkhornConfig,
    barycenter_1d,
    barycentric_projection,
    correlation_cost,
    cost_matrix,
    emd,
    sinkhorn,
    w2_squared,
)
from oracles import correlation_by_permutations, emd_by_permutations


def uniform(points) -> DiscreteMeasure:
    return DiscreteMeasure.from_samples(np.asarray(points, dtype=float))


class TestCostMatrix:
    def test_identical_singletons(self):
        a = DiscreteMeasure.point_mass([2.0, -1.0])
        assert cost_matrix(a, a, "squared_euclidean")[0, 0] == 0.0

    def test_orthonormal_pair(self):
        a = DiscreteMeasure.point_mass([1.0, 0.0])
        b = DiscreteMeasure.point_mass([0.0, 1.0])
        assert cost_matrix(a, b, "squared_euclidean")[0, 0] == pytest.approx(2.0)
        assert cost_matrix(a, b, "neg_inner_product")[0, 0] == pytest.approx(0.0)

    def test_symmetric_on_shared_support(self, rng):
        a = uniform(rng.normal(size=(5, 2)))
        m = cost_matrix(a, a, "squared_euclidean")
        assert np.allclose(m, m.T)
        assert np.all(m >= 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            cost_matrix(
                DiscreteMeasure.point_mass([0.0]),
                DiscreteMeasure.point_mass([0.0, 0.0]),
                "squared_euclidean",
            )


class TestEmd:
    def test_two_point_masses(self):
        a = DiscreteMeasure.point_mass([0.0])
        b = DiscreteMeasure.point_mass([1.0])
        value, plan = emd(a, b, cost_matrix(a, b, "squared_euclidean"))
        assert value == pytest.approx(1.0)
        assert np.allclose(plan.matrix, [[1.0]])

    def test_shifted_uniform_pairs(self):
        a = uniform([[0.0], [1.0]])
        b = uniform([[2.0], [3.0]])
        value, _ = emd(a, b, cost_matrix(a, b, "squared_euclidean"))
        assert value == pytest.approx(4.0)  # monotone matching 0->2, 1->3

    def test_matches_permutation_minimum(self, rng):
        for _ in range(10):
            pts_a = rng.normal(size=(6, 2))
            pts_b = rng.normal(size=(6, 2))
            a, b = uniform(pts_a), uniform(pts_b)
            value, _ = emd(a, b, cost_matrix(a, b, "squared_euclidean"))
            assert value == pytest.approx(emd_by_permutations(pts_a, pts_b), abs=1e-9)

    def test_plan_marginals_and_objective(self, rng):
        a = DiscreteMeasure(rng.normal(size=(4, 1)), np.array([0.1, 0.2, 0.3, 0.4]))
        b = DiscreteMeasure(rng.normal(size=(3, 1)), np.array([0.5, 0.25, 0.25]))
        cost = cost_matrix(a, b, "squared_euclidean")
        value, plan = emd(a, b, cost)
        assert np.max(np.abs(plan.matrix.sum(axis=1) - a.weights)) <= 1e-7
        assert np.max(np.abs(plan.matrix.sum(axis=0) - b.weights)) <= 1e-7
        assert value == pytest.approx(float(np.sum(cost * plan.matrix)), abs=1e-9)


class TestW2Squared:
    def test_self_distance_zero(self):
        a = DiscreteMeasure.point_mass([0.7, -0.3])
        assert w2_squared(a, a) == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_displacement(self):
        a = DiscreteMeasure.point_mass([0.0, 0.0])
        b = DiscreteMeasure.point_mass([3.0, 4.0])
        assert w2_squared(a, b) == pytest.approx(25.0)

    def test_symmetric_split_to_center(self):
        a = uniform([[-1.0], [1.0]])
        b = DiscreteMeasure.point_mass([0.0])
        assert w2_squared(a, b) == pytest.approx(1.0)

    def test_symmetry(self, rng):
        a = uniform(rng.normal(size=(5, 2)))
        b = uniform(rng.normal(size=(7, 2)))
        assert abs(w2_squared(a, b) - w2_squared(b, a)) <= 1e-9

    def test_triangle_inequality(self, rng):
        for _ in range(5):
            a = uniform(rng.normal(size=(4, 2)))
            b = uniform(rng.normal(size=(5, 2)))
            c = uniform(rng.normal(size=(3, 2)))
            dab = np.sqrt(w2_squared(a, b))
            dbc = np.sqrt(w2_squared(b, c))
            dac = np.sqrt(w2_squared(a, c))
            assert dac <= dab + dbc + 1e-7


class TestCorrelationCost:
    def test_point_masses_inner_product(self):
        a = DiscreteMeasure.point_mass([1.0, 2.0])
        b = DiscreteMeasure.point_mass([-3.0, 0.5])
        assert correlation_cost(a, b) == pytest.approx(-2.0)

    def test_symmetric_two_point_self(self):
        a = uniform([[-1.0], [1.0]])
        assert correlation_cost(a, a) == pytest.approx(1.0)

    def test_polarization_identity(self, rng):
        for _ in range(5):
            a = uniform(rng.normal(size=(5, 2)))
            b = uniform(rng.normal(size=(5, 2)))
            _, m2a = moments(a)
            _, m2b = moments(b)
            via_polarization = 0.5 * (m2a + m2b - w2_squared(a, b))
            assert correlation_cost(a, b) == pytest.approx(via_polarization, abs=1e-7)

    def test_matches_permutation_maximum(self, rng):
        pts_a = rng.normal(size=(5, 1))
        pts_b = rng.normal(size=(5, 1))
        got = correlation_cost(uniform(pts_a), uniform(pts_b))
        assert got == pytest.approx(correlation_by_permutations(pts_a, pts_b), abs=1e-9)

    def test_cauchy_schwarz_bound(self, rng):
        for _ in range(5):
            a = uniform(rng.normal(size=(6, 2)))
            b = uniform(rng.normal(size=(4, 2)))
            _, m2a = moments(a)
            _, m2b = moments(b)
            assert correlation_cost(a, b) <= np.sqrt(m2a * m2b) + 1e-7


class TestSinkhorn:
    def test_coincident_point_masses(self):
        a = DiscreteMeasure.point_mass([0.0])
        cfg = SinkhornConfig(reg=0.1, max_iters=500, tolerance=1e-9)
        value, _ = sinkhorn(a, a, cost_matrix(a, a, "squared_euclidean"), cfg)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_close_to_exact_at_small_reg(self, rng):
        a = uniform(rng.normal(size=(20, 2)))
        b = uniform(rng.normal(size=(20, 2)))
        cost = cost_matrix(a, b, "squared_euclidean")
        exact, _ = emd(a, b, cost)
        cfg = SinkhornConfig(
            reg=1e-3 * float(cost.max()), max_iters=20_000, tolerance=1e-9
        )
        value, plan = sinkhorn(a, b, cost, cfg)
        assert abs(value - exact) <= 0.05 * max(abs(exact), 1e-12)
        assert np.max(np.abs(plan.matrix.sum(axis=1) - a.weights)) <= 1e-9

    def test_symmetric_instance_gives_symmetric_plan(self, rng):
        a = uniform(rng.normal(size=(6, 1)))
        cost = cost_matrix(a, a, "squared_euclidean")
        cfg = SinkhornConfig(reg=0.05 * float(cost.max()), max_iters=5000, tolerance=1e-10)
        _, plan = sinkhorn(a, a, cost, cfg)
        assert np.max(np.abs(plan.matrix - plan.matrix.T)) <= 1e-6

    def test_value_at_least_exact(self, rng):
        a = uniform(rng.normal(size=(8, 2)))
        b = uniform(rng.normal(size=(8, 2)))
        cost = cost_matrix(a, b, "squared_euclidean")
        exact, _ = emd(a, b, cost)
        cfg = SinkhornConfig(reg=0.02 * float(cost.max()), max_iters=5000, tolerance=1e-9)
        value, _ = sinkhorn(a, b, cost, cfg)
        assert value >= exact - 1e-9


class TestBarycentricProjection:
    def test_identity_coupling_returns_anchors(self, rng):
        pts = rng.normal(size=(5, 2))
        a = uniform(pts)
        _, plan = emd(a, a, cost_matrix(a, a, "squared_euclidean"))
        kept, means = barycentric_projection(plan, pts)
        assert np.allclose(means, pts[kept], atol=1e-9)

    def test_single_source_atom_is_constant(self, rng):
        rho = DiscreteMeasure.point_mass([0.3])
        nu = uniform(rng.normal(size=(4, 1)))
        _, plan = emd(rho, nu, cost_matrix(rho, nu, "squared_euclidean"))
        _, values = barycentric_projection(plan, rho.points)
        assert np.allclose(values, 0.3)

    def test_monotone_coupling_nondecreasing(self, rng):
        xs = np.sort(rng.uniform(-1, 1, 30))[:, None]
        ys = np.sort(rng.uniform(-1, 1, 30))[:, None]
        a, b = uniform(xs), uniform(ys)
        _, plan = emd(a, b, cost_matrix(a, b, "squared_euclidean"))
        kept, means = barycentric_projection(plan, xs)
        order = np.argsort(ys[kept, 0])
        assert np.all(np.diff(means[order, 0]) >= -1e-9)


def _w2_shared_grid(grid: np.ndarray, wa: np.ndarray, wb: np.ndarray) -> float:
    """Exact 1D squared Wasserstein between histograms on one sorted grid."""
    ca = np.cumsum(wa)
    cb = np.cumsum(wb)
    levels = np.unique(np.concatenate([[0.0], ca, cb]))
    levels = np.clip(levels, 0.0, 1.0)
    mids = 0.5 * (levels[:-1] + levels[1:])
    seg = np.diff(levels)
    xa = grid[np.searchsorted(ca, mids, side="left").clip(max=len(grid) - 1)]
    xb = grid[np.searchsorted(cb, mids, side="left").clip(max=len(grid) - 1)]
    return float(np.sum(seg * (xa - xb) ** 2))


def _mesh_weights(n_nodes: int, steps: int) -> np.ndarray:
    combos = itertools.combinations(range(steps + n_nodes - 1), n_nodes - 1)
    rows = []
    for cut in combos:
        prev = -1
        counts = []
        for c in cut:
            counts.append(c - prev - 1)
            prev = c
        counts.append(steps + n_nodes - 2 - prev)
        rows.append(counts)
    return np.asarray(rows, dtype=float) / steps


class TestBarycenter1d:
    def test_identical_inputs_are_a_fixed_point(self):
        grid = make_ball_grid(1, 5)
        w = np.array([0.1, 0.2, 0.4, 0.2, 0.1])
        a = DiscreteMeasure(grid.nodes, w)
        bary = barycenter_1d(a, a, grid)
        assert w2_squared(bary, a) == pytest.approx(0.0, abs=1e-9)

    def test_midpoint_of_two_point_masses(self):
        grid = make_ball_grid(1, 5)  # nodes -1, -0.5, 0, 0.5, 1
        a = measure_from_node(grid, 0.0)
        b = measure_from_node(grid, 1.0)
        bary = barycenter_1d(a, b, grid)
        objective = w2_squared(a, bary) + w2_squared(bary, b)
        assert objective == pytest.approx(0.5, abs=1e-9)
        top = bary.points[np.argmax(bary.weights), 0]
        assert top == pytest.approx(0.5)

    def test_beats_every_mesh_candidate(self, rng):
        grid = make_ball_grid(1, 11)
        nodes = grid.nodes[:, 0]
        raw_a, raw_b = rng.random(11), rng.random(11)
        wa, wb = raw_a / raw_a.sum(), raw_b / raw_b.sum()
        a = DiscreteMeasure(grid.nodes, wa)
        b = DiscreteMeasure(grid.nodes, wb)
        bary = barycenter_1d(a, b, grid)
        lp_objective = w2_squared(a, bary) + w2_squared(bary, b)

        mesh = _mesh_weights(11, 10)  # every weight vector with step 0.1
        best = np.inf
        for chunk_start in range(0, mesh.shape[0], 4096):
            for wr in mesh[chunk_start : chunk_start + 4096]:
                val = _w2_shared_grid(nodes, wa, wr) + _w2_shared_grid(nodes, wr, wb)
                if val < best:
                    best = val
        # the LP optimizes over the full simplex, so it can only do better
        assert lp_objective <= best + 1e-9


def measure_from_node(grid, node_value: float) -> DiscreteMeasure:
    w = np.zeros(grid.n_nodes)
    w[np.argmin(np.abs(grid.nodes[:, 0] - node_value))] = 1.0
    return DiscreteMeasure(grid.nodes, w)


@given(
    st.integers(min_value=2, max_value=5),
    st.integers(min_value=2, max_value=5),
    st.integers(min_value=0, max_value=10_000),
)
@settings(max_examples=20)
def test_emd_objective_recomputation(n, m, seed):
    rng = np.random.default_rng(seed)
    a = uniform(rng.normal(size=(n, 2)))
    b = uniform(rng.normal(size=(m, 2)))
    cost = cost_matrix(a, b, "squared_euclidean")
    value, plan = emd(a, b, cost)
    assert abs(value - float(np.sum(cost * plan.matrix))) <= 1e-9
    assert np.all(plan.matrix >= 0.0)

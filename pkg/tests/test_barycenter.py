"""
Tests for the leave-one-out center of mass.
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from npcselect.barycenter import (center_of_mass, config_diameter, hull_sample, leave_one_out_step,
                                  two_point_center)
from npcselect.errors import ConvergenceError, InputError
from npcselect.spaces import EuclideanSpace, HyperbolicSpace, make_rng
from npcselect.state import Configuration, SpacePoint, WeightedPoint

from conftest import hyperbolic_point


def weighted(space, seed, n, scale=2.0):
    rng = make_rng(seed)
    points = [space.random_point(int(rng.integers(1 << 40)), scale) for _ in range(n)]
    return Configuration.of(points, list(rng.uniform(0.5, 2.0, size=n)))


def weighted_mean(X):
    masses = np.array(X.masses)
    return (masses[:, None] * np.array([p.coords for p in X.points])).sum(axis=0) / masses.sum()


class TestWeightedPoint:
    @pytest.mark.parametrize("mass", [0.0, -1.0, float("inf"), float("nan")])
    def test_mass_must_be_positive(self, mass):
        with pytest.raises(InputError):
            WeightedPoint(SpacePoint.at([0, 0]), mass)

    def test_empty_configuration(self):
        with pytest.raises(InputError):
            Configuration([])


# =============================================================================
# Two-point center
# =============================================================================

class TestTwoPointCenter:
    """The geodesic is divided in the ratio m_b : m_a."""

    def test_equal_masses_midpoint(self, plane):
        c = two_point_center(plane, WeightedPoint(SpacePoint.at([0, 0]), 1), WeightedPoint(SpacePoint.at([3, 0]), 1))
        assert c.coords == (1.5, 0.0)

    def test_heavier_mass_attracts(self, plane):
        c = two_point_center(plane, WeightedPoint(SpacePoint.at([0, 0]), 1), WeightedPoint(SpacePoint.at([3, 0]), 2))
        np.testing.assert_allclose(c.array(), [2.0, 0.0], atol=1e-12)

    def test_hyperbolic_midpoint(self, disk):
        c = two_point_center(disk, WeightedPoint(SpacePoint.at([1, 0, 0]), 1), WeightedPoint(hyperbolic_point(2.0), 1))
        np.testing.assert_allclose(c.array(), hyperbolic_point(1.0).array(), atol=1e-9)

    def test_swap_is_bit_identical(self, space):
        for seed in range(50):
            X = weighted(space, seed, 2)
            assert two_point_center(space, X[0], X[1]) == two_point_center(space, X[1], X[0])

    def test_division_ratio(self, space):
        for seed in range(1000):
            X = weighted(space, seed, 2)
            a, b = X[0], X[1]
            c = two_point_center(space, a, b)
            d = space.distance(a.point, b.point)
            assert abs(space.distance(a.point, c) - b.mass / (a.mass + b.mass) * d) <= 1e-9 * max(d, 1e-300)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1), scale=st.floats(min_value=0.01, max_value=100.0))
    def test_mass_scaling_invariance(self, seed, scale):
        space = HyperbolicSpace(2)
        X = weighted(space, seed, 2)
        Y = X.scaled(scale)
        assert space.distance(two_point_center(space, *X), two_point_center(space, *Y)) <= 1e-9


# =============================================================================
# Leave-one-out step and center of mass
# =============================================================================

class TestLeaveOneOutStep:
    """One round of the construction."""

    def test_needs_three_points(self, plane):
        with pytest.raises(InputError):
            leave_one_out_step(plane, Configuration.uniform([SpacePoint.at([0, 0]), SpacePoint.at([1, 0])]))

    def test_unit_masses_preserved(self, plane):
        X = Configuration.uniform([SpacePoint.at([0, 0]), SpacePoint.at([1, 0]), SpacePoint.at([0, 1])])
        assert leave_one_out_step(plane, X).masses == [1.0, 1.0, 1.0]

    def test_total_mass_preserved(self, space):
        X = weighted(space, 3, 4)
        assert leave_one_out_step(space, X).total_mass == pytest.approx(X.total_mass, rel=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_euclidean_one_step_collapse(self, n):
        space = EuclideanSpace(3)
        for seed in range(5):
            X = weighted(space, seed, n)
            mean = weighted_mean(X)
            step = leave_one_out_step(space, X)
            for p in step.points:
                np.testing.assert_allclose(p.array(), mean, atol=1e-8)
            assert config_diameter(space, step) <= 1e-9 * config_diameter(space, X)
            np.testing.assert_allclose(center_of_mass(space, X).center.array(), mean, atol=1e-8)

    def test_hyperbolic_contracts(self, disk):
        X = Configuration.uniform([hyperbolic_point(2.0, 0.0), hyperbolic_point(2.0, 2.1), hyperbolic_point(2.0, 4.2)])
        assert config_diameter(disk, leave_one_out_step(disk, X)) < config_diameter(disk, X)

    def test_contraction_all_spaces(self, space):
        for seed in range(20):
            X = weighted(space, seed, 3)
            assert config_diameter(space, leave_one_out_step(space, X)) <= config_diameter(space, X) + 1e-12


class TestCenterOfMass:
    """Iteration to a single point."""

    def test_singleton(self, plane):
        X = Configuration([WeightedPoint(SpacePoint.at([7, -2]), 5)])
        result = center_of_mass(plane, X)
        assert result.center == SpacePoint.at([7, -2])
        assert result.iterations == 0
        assert result.diameter_trace == (0.0,)

    def test_triangle_centroid(self, plane):
        X = Configuration.uniform([SpacePoint.at([0, 0]), SpacePoint.at([1, 0]), SpacePoint.at([0, 1])])
        result = center_of_mass(plane, X, tol=1e-8)
        np.testing.assert_allclose(result.center.array(), [1 / 3, 1 / 3], atol=1e-12)
        assert result.iterations <= 1
        assert result.converged

    def test_pair_is_two_point_center(self, disk):
        X = weighted(disk, 4, 2)
        result = center_of_mass(disk, X)
        assert result.center == two_point_center(disk, X[0], X[1])
        assert result.iterations == 0

    def test_coincident_points(self, plane):
        p = SpacePoint.at([1, 1])
        result = center_of_mass(plane, Configuration.uniform([p, p, p]))
        assert result.center == p
        assert result.iterations == 0

    def test_tree_symmetric_arms(self, star):
        b = star.vertex_point("B")
        X = Configuration.uniform([star.point_from_vertex(e, "B", 0.5) for e in (0, 1, 2)])
        result = center_of_mass(star, X)
        assert star.distance(result.center, b) < 1e-8

    @pytest.mark.parametrize("seed", range(50))
    def test_hyperbolic_convergence(self, disk, seed):
        X = weighted(disk, seed, 3 + seed % 4, scale=2.5)
        result = center_of_mass(disk, X, tol=1e-8, max_iters=200)
        assert result.converged
        assert result.diameter_trace[-1] < 1e-8
        trace = result.diameter_trace
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    @pytest.mark.parametrize("seed", range(10))
    def test_permutation_invariance(self, disk, seed):
        X = weighted(disk, seed, 3 + seed % 4, scale=2.5)
        order = [int(i) for i in make_rng(seed).permutation(len(X))]
        c = center_of_mass(disk, X, tol=1e-10).center
        c2 = center_of_mass(disk, X.permuted(order), tol=1e-10).center
        assert disk.distance(c, c2) <= 1e-8

    def test_mass_scaling_invariance(self, space):
        X = weighted(space, 12, 4)
        c = center_of_mass(space, X, tol=1e-10).center
        assert space.distance(c, center_of_mass(space, X.scaled(3.5), tol=1e-10).center) <= 1e-9

    def test_non_convergence_carries_partial_trace(self, disk):
        X = Configuration.uniform([hyperbolic_point(2.0, 0.0), hyperbolic_point(2.0, 2.1), hyperbolic_point(2.0, 4.2)])
        with pytest.raises(ConvergenceError) as info:
            center_of_mass(disk, X, tol=1e-8, max_iters=1)
        partial = info.value.result
        assert partial is not None and not partial.converged
        assert partial.iterations == 1
        assert len(partial.diameter_trace) == 2

    def test_recursion_cap(self, plane):
        X = Configuration.uniform([SpacePoint.at([i, 0]) for i in range(8)])
        with pytest.raises(InputError):
            center_of_mass(plane, X)

    @pytest.mark.parametrize("tol", [0.0, -1e-8])
    def test_bad_tolerance(self, plane, tol):
        with pytest.raises(InputError):
            center_of_mass(plane, Configuration.uniform([SpacePoint.at([0, 0])]), tol=tol)


# =============================================================================
# Convex hull diameter
# =============================================================================

class TestHullDiameter:
    """The hull of a finite set is no wider than the set itself."""

    def test_singleton(self, plane):
        assert config_diameter(plane, Configuration.uniform([SpacePoint.at([1, 2])])) == 0.0

    def test_right_triangle(self, plane):
        X = Configuration.uniform([SpacePoint.at([0, 0]), SpacePoint.at([3, 0]), SpacePoint.at([0, 4])])
        assert config_diameter(plane, X) == 5.0

    def test_at_least_every_pair(self, disk):
        X = weighted(disk, 2, 5)
        diam = config_diameter(disk, X)
        for x in X.points:
            for y in X.points:
                assert disk.distance(x, y) <= diam

    def test_segment_samples(self, plane):
        X = Configuration.uniform([SpacePoint.at([0, 0]), SpacePoint.at([2, 0])])
        for p in hull_sample(plane, X, depth=1, seed=0):
            assert p.coords[1] == 0.0 and 0.0 <= p.coords[0] <= 2.0

    def test_deterministic(self, space):
        X = weighted(space, 1, 3)
        assert hull_sample(space, X, 2, seed=9) == hull_sample(space, X, 2, seed=9)

    def test_samples_within_diameter(self, space):
        for seed in range(3):
            X = weighted(space, seed, 4)
            diam = config_diameter(space, X)
            samples = hull_sample(space, X, depth=4, seed=seed, per_round=250)
            assert len(samples) == 1000
            assert space.distance_matrix(samples, X.points).max() <= diam + 1e-9
            assert space.distance_matrix(samples[:100], samples[-100:]).max() <= diam + 1e-9

    @pytest.mark.parametrize("a", [0.25, 0.5, 0.9])
    def test_scaled_configuration(self, space, a):
        X = weighted(space, 17, 5)
        p = space.random_point(99, 1.0)
        Y = Configuration.uniform([space.geodesic_point(p, x, a) for x in X.points])
        for x, y, u, v in zip(X.points, Y.points, X.points[1:], Y.points[1:]):
            assert space.distance(y, v) <= a * space.distance(x, u) + 1e-9
        assert config_diameter(space, Y) <= a * config_diameter(space, X) + 1e-9

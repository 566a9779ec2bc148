"""Unit tests for the built-in test problems.

Test Categories:
    - Integration Operator
    - Kernel Operators
    - Ground Truths and Noise
    - Nonlinear Problems
"""

import numpy as np
import pytest

from illposed.exceptions import DomainError, InputError, ParameterError, SizeError
from illposed.models.singular_system import RandomSource
from illposed.problems import (
    add_noise_exact,
    analytic_mismatch,
    make_gaussian_kernel_operator,
    make_ground_truth,
    make_integration_operator,
    make_kernel_operator,
    make_linear_forward,
    midpoint_grid,
    source_representer,
)

from ._fixtures import *  # noqa: F403, F401


class TestIntegrationOperator:
    """Test the discretized integration operator and its analytic singular system."""

    def test_matrix_structure(self, integration_64):
        """Verify A is lower triangular with h below and h/2 on the diagonal."""
        a, h = integration_64.a, integration_64.h

        assert np.allclose(np.triu(a, k=1), 0.0)
        assert np.allclose(np.diag(a), h / 2)
        assert np.allclose(a[np.tril_indices(64, k=-1)], h)

    def test_integrates_constant(self, integration_64):
        """Verify A 1 equals the antiderivative t at the midpoints."""
        np.testing.assert_allclose(integration_64.a @ np.ones(64), integration_64.grid, rtol=1e-14)

    def test_singular_values_match_closed_form(self, integration_256):
        """Verify the leading singular values are within 2/n of 2/((2k-1) pi)."""
        assert analytic_mismatch(integration_256, 10) <= 2.0 / 256

    def test_first_singular_vector_matches_cosine(self, integration_256):
        """Verify v_1 is within 1e-2 rad of the sampled sqrt(2) cos(pi t / 2)."""
        problem = integration_256
        sampled = problem.analytic.sampled_right(1, problem.grid, problem.h)
        cosine = abs(problem.singular_system.v[:, 0] @ sampled) / np.linalg.norm(sampled)

        assert np.arccos(min(cosine, 1.0)) <= 1e-2

    def test_sampled_functions_have_unit_norm(self, integration_256):
        """Verify the sqrt(h) scaling gives near-unit Euclidean norms."""
        problem = integration_256
        right = problem.analytic.sampled_right(3, problem.grid, problem.h)
        left = problem.analytic.sampled_left(3, problem.grid, problem.h)

        assert np.linalg.norm(right) == pytest.approx(1.0, abs=1e-3)
        assert np.linalg.norm(left) == pytest.approx(1.0, abs=1e-3)

    def test_small_grid_rejected(self):
        """Verify n < 4 raises SizeError."""
        with pytest.raises(SizeError):
            midpoint_grid(3)


class TestKernelOperators:
    """Test generic kernel discretization."""

    def test_kernel_orientation(self):
        """Verify A_ij = h k(t_j, t_i) with s along columns."""
        problem = make_kernel_operator(8, lambda s, t: s + 10.0 * t)
        grid, h = problem.grid, problem.h

        assert problem.a[2, 5] == pytest.approx(h * (grid[5] + 10.0 * grid[2]))

    def test_constant_kernel_broadcast(self):
        """Verify a scalar-valued kernel fills the full matrix."""
        problem = make_kernel_operator(6, lambda s, t: 1.0)

        np.testing.assert_allclose(problem.a, np.full((6, 6), 1.0 / 6))

    def test_non_finite_kernel_rejected(self):
        """Verify kernels producing NaN raise InputError."""
        with pytest.raises(InputError):
            make_kernel_operator(6, lambda s, t: np.log(s - t))

    def test_gaussian_kernel_is_symmetric(self):
        """Verify the Gaussian blur matrix is symmetric and named."""
        problem = make_gaussian_kernel_operator(32)

        assert problem.name == "kernel_gauss"
        np.testing.assert_allclose(problem.a, problem.a.T)

    def test_gaussian_width_must_be_positive(self):
        """Verify a nonpositive width raises ParameterError."""
        with pytest.raises(ParameterError):
            make_gaussian_kernel_operator(16, width=0.0)


class TestGroundTruthAndNoise:
    """Test source-condition truths and exact-norm noise."""

    def test_ground_truth_satisfies_source_condition(self, integration_64):
        """Verify x_dag = V diag(sigma^nu) V^T w."""
        system = integration_64.singular_system
        w = source_representer(integration_64, "smooth", 2.0)
        truth = make_ground_truth(integration_64, 1.0, w)

        assert truth.rho == pytest.approx(2.0)
        np.testing.assert_allclose(truth.x_dag, system.v @ (system.sigma * (system.v.T @ w)), atol=1e-14)

    def test_mode_representer_is_first_singular_vector(self, integration_64):
        """Verify the mode representer is rho v_1."""
        w = source_representer(integration_64, "mode", 0.5)

        np.testing.assert_allclose(w, 0.5 * integration_64.singular_system.v[:, 0])

    def test_random_representer_needs_source(self, integration_64):
        """Verify the random kind without a source raises ParameterError."""
        with pytest.raises(ParameterError):
            source_representer(integration_64, "random", 1.0)

    def test_negative_order_rejected(self, integration_64):
        """Verify nu < 0 raises ParameterError."""
        with pytest.raises(ParameterError):
            make_ground_truth(integration_64, -1.0, np.ones(64))

    @pytest.mark.parametrize("delta", [1e-1, 1e-4, 1e-8])
    def test_noise_has_exact_norm(self, smooth_data_64, delta):
        """Verify ||y_delta - y|| equals delta."""
        _, y = smooth_data_64
        noisy = add_noise_exact(y, delta, RandomSource(seed=3))

        assert np.linalg.norm(noisy - y) == pytest.approx(delta, rel=1e-12)

    def test_zero_noise_returns_copy(self, smooth_data_64):
        """Verify delta = 0 returns an unchanged copy."""
        _, y = smooth_data_64
        noisy = add_noise_exact(y, 0.0, RandomSource(seed=3))

        np.testing.assert_array_equal(noisy, y)
        assert noisy is not y


class TestNonlinearProblems:
    """Test the nonlinear forward maps."""

    def test_diagonal_cubic_values(self, diagonal_cubic_32):
        """Verify F(x)_k = sigma_k (x_k + c x_k^3)."""
        x = np.full(32, 2.0)
        sigma = np.arange(1, 33, dtype=float) ** -2

        np.testing.assert_allclose(diagonal_cubic_32.evaluate(x), sigma * (2.0 + 0.1 * 8.0))

    def test_autoconvolution_of_constant(self, autoconvolution_64):
        """Verify the autoconvolution of ones is h * i at node i."""
        values = autoconvolution_64.evaluate(np.ones(64))

        np.testing.assert_allclose(values, np.arange(1, 65) / 64)

    def test_autoconvolution_derivative_is_exact_for_quadratic(self, autoconvolution_64, random_source):
        """Verify F(x + e) = F(x) + F'(x) e + F(e) for the quadratic map."""
        x = random_source.generator.standard_normal(64)
        e = random_source.generator.standard_normal(64)
        problem = autoconvolution_64

        np.testing.assert_allclose(
            problem.evaluate(x + e), problem.evaluate(x) + problem.jacobian(x) @ e + problem.evaluate(e), atol=1e-12
        )

    def test_domain_violation_raises(self, diagonal_cubic_32):
        """Verify evaluation outside the domain ball raises DomainError."""
        with pytest.raises(DomainError):
            diagonal_cubic_32.evaluate(np.full(32, 100.0))

    def test_linear_forward_wraps_matrix(self, integration_64, smooth_data_64):
        """Verify the linear wrapper evaluates A x with constant derivative A."""
        x, y = smooth_data_64
        problem = make_linear_forward(integration_64.a)

        np.testing.assert_allclose(problem.evaluate(x), y)
        np.testing.assert_array_equal(problem.jacobian(np.zeros(64)), integration_64.a)

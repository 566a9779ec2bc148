"""Unit tests for spectral filter regularization.

Test Categories:
    - Filter Application
    - Tikhonov Solves and Value Functions
    - Linear Landweber Iteration
    - Qualification and Saturation
"""

import numpy as np
import pytest

from illposed.exceptions import ParameterError
from illposed.models.filter import Filter
from illposed.models.singular_system import RandomSource
from illposed.models.trace import StopReason
from illposed.problems import add_noise_exact
from illposed.spectral import (
    approximation_bound,
    default_omega,
    filter_amplification,
    filter_apply,
    landweber_run,
    qualification_scan,
    tikhonov_solve,
    value_derivative_error,
    value_functions,
)

from ._fixtures import *  # noqa: F403, F401


class TestFilterApply:
    """Test R_alpha y through the singular system."""

    @pytest.mark.parametrize("alpha", [1e-2, 1e-4, 1e-6])
    def test_tikhonov_filter_matches_normal_equations(self, integration_64, smooth_data_64, alpha):
        """Verify the spectral formula agrees with (A^T A + alpha I)^-1 A^T y."""
        _, y = smooth_data_64
        spectral = filter_apply(Filter.tikhonov(), alpha, integration_64.singular_system, y)

        direct = tikhonov_solve(integration_64.a, y, alpha)

        assert np.linalg.norm(spectral - direct) <= 1e-10 * np.linalg.norm(direct)

    def test_tsvd_keeps_modes_above_threshold(self, integration_64, smooth_data_64):
        """Verify TSVD equals the truncated pseudoinverse."""
        _, y = smooth_data_64
        system = integration_64.singular_system
        alpha = float(system.sigma[9] * system.sigma[10])
        expected = system.v[:, :10] @ (system.u[:, :10].T @ y / system.sigma[:10])

        np.testing.assert_allclose(filter_apply(Filter.tsvd(), alpha, system, y), expected, atol=1e-12)

    def test_nonpositive_alpha_rejected(self, integration_64, smooth_data_64):
        """Verify alpha <= 0 raises ParameterError."""
        with pytest.raises(ParameterError):
            filter_apply(Filter.tikhonov(), 0.0, integration_64.singular_system, smooth_data_64[1])

    def test_amplification_bounds(self, integration_64):
        """Verify ||R_alpha|| <= 1/sqrt(alpha) for TSVD and 1/(2 sqrt(alpha)) for Tikhonov."""
        system = integration_64.singular_system
        alpha = 1e-4

        assert filter_amplification(Filter.tsvd(), alpha, system) <= 1.0 / np.sqrt(alpha)
        assert filter_amplification(Filter.tikhonov(), alpha, system) <= 0.5 / np.sqrt(alpha) * (1 + 1e-12)


class TestTikhonov:
    """Test Tikhonov solves and value functions."""

    def test_prior_shift_minimizes_shifted_functional(self, integration_64, smooth_data_64):
        """Verify x - x0 solves the Tikhonov problem for y - A x0."""
        _, y = smooth_data_64
        a = integration_64.a
        x0 = np.linspace(0.0, 1.0, 64)
        shifted = tikhonov_solve(a, y, 1e-3, x0=x0)

        np.testing.assert_allclose(shifted - x0, tikhonov_solve(a, y - a @ x0, 1e-3), atol=1e-10)

    def test_value_functions_monotone(self, integration_64, smooth_data_64):
        """Verify f increases and g decreases in alpha."""
        _, y = smooth_data_64
        noisy = add_noise_exact(y, 1e-3, RandomSource(seed=5))
        values = value_functions(integration_64.a, noisy, np.geomspace(1e-8, 1e-1, 15))

        assert np.all(np.diff(values.f) >= 0)
        assert np.all(np.diff(values.g) <= 0)
        np.testing.assert_allclose(values.j, values.f + values.alphas * values.g)

    def test_value_derivative_matches_penalty(self, integration_64, smooth_data_64):
        """Verify the finite-difference derivative of j tracks g."""
        _, y = smooth_data_64
        noisy = add_noise_exact(y, 1e-3, RandomSource(seed=5))
        alphas = np.geomspace(1e-6, 1e-2, 200)
        errors = value_derivative_error(value_functions(integration_64.a, noisy, alphas))

        assert np.isnan(errors[0]) and np.isnan(errors[-1])
        assert np.nanmax(errors) < 1e-2

    def test_value_functions_need_increasing_grid(self, integration_64, smooth_data_64):
        """Verify a decreasing grid raises ParameterError."""
        with pytest.raises(ParameterError):
            value_functions(integration_64.a, smooth_data_64[1], [1e-2, 1e-3])


class TestLandweber:
    """Test the linear Landweber iteration."""

    @pytest.mark.parametrize("m", [1, 7, 100])
    def test_iterate_matches_filter(self, integration_64, smooth_data_64, m):
        """Verify m steps equal the Landweber filter with alpha = 1/m."""
        _, y = smooth_data_64
        system = integration_64.singular_system
        omega = default_omega(float(system.sigma[0]))
        run = landweber_run(integration_64.a, y, omega, max_iter=m)

        assert run.n_steps == m
        assert run.stop_reason is StopReason.MAX_ITER
        np.testing.assert_allclose(run.x, filter_apply(Filter.landweber(omega), 1.0 / m, system, y), atol=1e-10)

    def test_residual_decreases_and_error_semiconverges(self, integration_64, smooth_data_64):
        """Verify monotone residuals and nonincreasing error while the residual exceeds 2 delta."""
        x, y = smooth_data_64
        delta = 1e-3
        noisy = add_noise_exact(y, delta, RandomSource(seed=9))
        run = landweber_run(integration_64.a, noisy, delta=delta, tau=2.5, max_iter=100_000, reference=x)

        assert run.stop_reason is StopReason.DISCREPANCY
        assert run.residual_norms[-1] <= 2.5 * delta
        assert np.all(np.diff(run.residual_norms) < 0)
        for n in range(run.n_steps):
            if run.residual_norms[n] > 2 * delta:
                assert run.error_norms[n + 1] <= run.error_norms[n] * (1 + 1e-12)

    def test_zero_steps_when_data_already_small(self, integration_64):
        """Verify N = 0 when ||y|| <= tau delta."""
        run = landweber_run(integration_64.a, np.full(64, 1e-6), delta=1.0, tau=1.5)

        assert run.n_steps == 0
        np.testing.assert_array_equal(run.x, np.zeros(64))

    def test_omega_out_of_range_rejected(self, integration_64, smooth_data_64):
        """Verify omega >= 1/sigma_1^2 raises ParameterError."""
        sigma_max = float(integration_64.singular_system.sigma[0])
        with pytest.raises(ParameterError):
            landweber_run(integration_64.a, smooth_data_64[1], 1.5 / sigma_max**2, max_iter=5)

    def test_half_discrepancy_arguments_rejected(self, integration_64, smooth_data_64):
        """Verify delta without tau raises ParameterError."""
        with pytest.raises(ParameterError):
            landweber_run(integration_64.a, smooth_data_64[1], delta=1e-3)


class TestQualification:
    """Test approximation bounds and their saturation."""

    ALPHAS = np.geomspace(1e-8, 1e-4, 9)

    @pytest.mark.parametrize(("nu", "expected"), [(1.0, 0.5), (2.0, 1.0), (4.0, 1.0)])
    def test_tikhonov_saturates_at_qualification(self, nu, expected):
        """Verify the slope is nu/2 up to nu = 2 and then stays at 1."""
        assert qualification_scan(Filter.tikhonov(), nu, self.ALPHAS, 1.0) == pytest.approx(expected, abs=0.05)

    @pytest.mark.parametrize("nu", [1.0, 4.0])
    def test_tsvd_does_not_saturate(self, nu):
        """Verify TSVD's slope keeps growing as nu/2."""
        assert qualification_scan(Filter.tsvd(), nu, self.ALPHAS, 1.0) == pytest.approx(nu / 2, abs=0.05)

    def test_landweber_does_not_saturate(self):
        """Verify Landweber's slope is nu/2 for nu = 4."""
        alphas = 1.0 / np.array([30, 100, 300, 1000, 3000])
        slope = qualification_scan(Filter.landweber(0.9), 4.0, alphas, 1.0)

        assert slope == pytest.approx(2.0, abs=0.1)

    def test_approximation_bound_tikhonov_closed_form(self):
        """Verify omega_1(alpha) = sqrt(alpha)/2 for Tikhonov."""
        lambdas = np.geomspace(1e-10, 1.0, 20001)

        assert approximation_bound(Filter.tikhonov(), 1.0, 1e-4, lambdas) == pytest.approx(0.005, rel=1e-4)

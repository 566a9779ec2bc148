"""Unit tests for nonlinear regularization.

Test Categories:
    - Derivative and Nonlinearity Probes
    - Nonlinear Tikhonov
    - Nonlinear Landweber
    - Levenberg-Marquardt
    - Iteratively Regularized Gauss-Newton
"""

import numpy as np
import pytest

from illposed._utils_runner import fit_rate
from illposed.exceptions import AlphaRuleError, ConvergenceError, DivergenceError, ParameterError
from illposed.models.experiment import RunRecord
from illposed.models.problem import NonlinearProblem
from illposed.models.singular_system import RandomSource
from illposed.models.trace import StopReason
from illposed.nonlinear import (
    check_derivative,
    irgn,
    irgn_stopping_index,
    landweber_threshold,
    levenberg_marquardt,
    lm_alpha,
    nl_landweber,
    nl_tikhonov,
    nl_tikhonov_discrepancy,
    tangential_cone_probe,
)
from illposed.problems import add_noise_exact, make_diagonal_cubic, make_linear_forward
from illposed.spectral import tikhonov_solve

from ._fixtures import *  # noqa: F403, F401


@pytest.fixture
def cubic_truth():
    """Truth x_k = sigma_k w_k with w_k proportional to k^-1/2, ||w|| = 1."""
    k = np.arange(1, 33, dtype=float)
    w = k**-0.5
    return k**-2 * w / np.linalg.norm(w)


@pytest.fixture
def harmonic_cubic():
    """Benchmark cubic with sigma_k = 1/k in dimension 32 and truth sigma w, w proportional to 1/k."""
    sigma = 1.0 / np.arange(1, 33)
    w = sigma / np.linalg.norm(sigma)
    return make_diagonal_cubic(sigma, 0.1), sigma * w


class TestProbes:
    """Test derivative checks and tangential cone sampling."""

    def test_diagonal_cubic_remainder_is_quadratic(self, diagonal_cubic_32, random_source):
        """Verify the Taylor remainder slope lies in [1.8, 2.2]."""
        check = check_derivative(diagonal_cubic_32, random_source.generator.standard_normal(32))

        assert not check.exact
        assert 1.8 <= check.slope <= 2.2

    def test_autoconvolution_remainder_is_quadratic(self, autoconvolution_64):
        """Verify the quadratic map has slope 2."""
        check = check_derivative(autoconvolution_64, np.ones(64))

        assert check.slope == pytest.approx(2.0, abs=0.2)

    def test_linear_map_is_exact(self, integration_64):
        """Verify a linear map reports an exact derivative."""
        check = check_derivative(make_linear_forward(integration_64.a), np.ones(64))

        assert check.exact
        assert np.isnan(check.slope)

    def test_linear_map_has_zero_cone_constant(self, integration_64, random_source):
        """Verify eta = 0 and a zero Lipschitz estimate for a linear map."""
        probe = tangential_cone_probe(make_linear_forward(integration_64.a), np.zeros(64), 1.0, 20, random_source)

        assert probe.eta_estimate == pytest.approx(0.0, abs=1e-10)
        assert probe.lipschitz_estimate == pytest.approx(0.0, abs=1e-8)

    def test_cubic_cone_constant_small_near_zero(self, diagonal_cubic_32, random_source):
        """Verify the cone constant of the mild cubic is below 1/2 in a small ball."""
        probe = tangential_cone_probe(diagonal_cubic_32, np.zeros(32), 0.5, 50, random_source)

        assert 0.0 < probe.eta_estimate < 0.5

    def test_landweber_threshold(self):
        """Verify 2(1 + eta)/(1 - 2 eta) and the eta < 1/2 restriction."""
        assert landweber_threshold(0.0) == 2.0
        with pytest.raises(ParameterError):
            landweber_threshold(0.5)


class TestNonlinearTikhonov:
    """Test the Gauss-Newton Tikhonov solver and its discrepancy scan."""

    def test_linear_problem_matches_closed_form(self, integration_64, smooth_data_64):
        """Verify a linear forward map reproduces shifted Tikhonov."""
        _, y = smooth_data_64
        x0 = np.full(64, 0.1)
        x = nl_tikhonov(make_linear_forward(integration_64.a), y, 1e-3, x0)

        np.testing.assert_allclose(x, tikhonov_solve(integration_64.a, y, 1e-3, x0=x0), atol=1e-8)

    def test_discrepancy_scan_meets_bound(self, diagonal_cubic_32, cubic_truth):
        """Verify the selected minimizer has residual at most tau delta."""
        delta = 1e-3
        noisy = add_noise_exact(diagonal_cubic_32.evaluate(cubic_truth), delta, RandomSource(seed=4))
        outcome, x = nl_tikhonov_discrepancy(
            diagonal_cubic_32, noisy, delta, 1.5, np.zeros(32), np.geomspace(1.0, 1e-10, 41)
        )

        assert outcome.residual <= 1.5 * delta
        assert np.linalg.norm(diagonal_cubic_32.evaluate(x) - noisy) == pytest.approx(outcome.residual)

    def test_coarse_grid_is_refined_above_delta(self, diagonal_cubic_32, cubic_truth):
        """Verify bisection between bracketing grid points gives delta < residual <= tau delta."""
        delta = 1e-3
        noisy = add_noise_exact(diagonal_cubic_32.evaluate(cubic_truth), delta, RandomSource(seed=4))
        outcome, x = nl_tikhonov_discrepancy(diagonal_cubic_32, noisy, delta, 1.5, np.zeros(32), [1.0, 1e-10])

        assert not outcome.flagged
        assert delta < outcome.residual <= 1.5 * delta
        assert 1e-10 < outcome.alpha < 1.0
        assert outcome.index == 1
        assert np.linalg.norm(diagonal_cubic_32.evaluate(x) - noisy) == pytest.approx(outcome.residual)

    def test_overshoot_at_first_grid_point_is_flagged(self, diagonal_cubic_32, cubic_truth):
        """Verify a first grid alpha already at or below delta has no bracket and is flagged."""
        delta = 1e-3
        noisy = add_noise_exact(diagonal_cubic_32.evaluate(cubic_truth), delta, RandomSource(seed=4))
        outcome, _ = nl_tikhonov_discrepancy(diagonal_cubic_32, noisy, delta, 1.5, np.zeros(32), [1e-10])

        assert outcome.flagged
        assert outcome.residual <= delta
        assert outcome.alpha == 1e-10

    def test_acceptable_start_is_flagged(self, diagonal_cubic_32):
        """Verify x0 meeting the bound returns alpha = inf flagged."""
        outcome, x = nl_tikhonov_discrepancy(diagonal_cubic_32, np.full(32, 1e-4), 1.0, 1.5, np.zeros(32), [1.0])

        assert outcome.flagged
        assert outcome.alpha == np.inf
        np.testing.assert_array_equal(x, np.zeros(32))

    def test_budget_exhaustion_carries_iterate(self, autoconvolution_64):
        """Verify a zero iteration budget raises ConvergenceError with the last iterate."""
        with pytest.raises(ConvergenceError) as err:
            nl_tikhonov(autoconvolution_64, np.full(64, 0.5), 1e-3, np.ones(64), max_iter=0)

        np.testing.assert_array_equal(err.value.last_iterate, np.ones(64))


class TestNonlinearLandweber:
    """Test the nonlinear Landweber iteration."""

    def test_stops_by_discrepancy(self, diagonal_cubic_32, cubic_truth):
        """Verify the iteration reaches tau delta and keeps residuals in original units."""
        delta = 1e-3
        noisy = add_noise_exact(diagonal_cubic_32.evaluate(cubic_truth), delta, RandomSource(seed=8))
        trace = nl_landweber(diagonal_cubic_32, noisy, delta, 2.5, np.zeros(32), 100_000, reference=cubic_truth)

        assert trace.stop_reason is StopReason.DISCREPANCY
        assert trace.residual_norms[-1] <= 2.5 * delta
        assert trace.error_norms[-1] < trace.error_norms[0]

    @pytest.mark.parametrize("delta", [1e-2, 1e-3])
    def test_error_nonincreasing_above_cone_threshold(self, harmonic_cubic, random_source, delta):
        """Verify no step increases the error while the residual exceeds 2(1 + eta)/(1 - 2 eta) delta."""
        problem, truth = harmonic_cubic
        eta = tangential_cone_probe(problem, np.zeros(32), 1.0, 200, random_source).eta_estimate
        bound = landweber_threshold(eta) * delta
        noisy = add_noise_exact(problem.evaluate(truth), delta, RandomSource(seed=11))
        trace = nl_landweber(problem, noisy, delta, 2.5, np.zeros(32), 100_000, reference=truth)

        errors, residuals = trace.error_norms, trace.residual_norms
        active = residuals[:-1] > bound
        assert active.any()
        increases = errors[1:][active] - errors[:-1][active]
        assert np.all(increases <= 1e-12 * errors[:-1][active])

    @pytest.mark.performance
    def test_stopping_index_grows_with_decreasing_delta(self, harmonic_cubic):
        """Verify N increases across a delta sweep with log-log slope in [-2.3, -0.5]."""
        problem, truth = harmonic_cubic
        y = problem.evaluate(truth)
        deltas = np.array([1e-2, 1e-3, 1e-4])
        steps = []
        for delta in deltas:
            noisy = add_noise_exact(y, delta, RandomSource(seed=3))
            trace = nl_landweber(problem, noisy, delta, 2.5, np.zeros(32), 500_000)
            assert trace.stop_reason is StopReason.DISCREPANCY
            steps.append(trace.n_steps)

        assert steps[0] >= 1
        assert all(later > earlier for earlier, later in zip(steps, steps[1:], strict=False))
        slope = np.polyfit(np.log(deltas), np.log(steps), 1)[0]
        assert -2.3 <= slope <= -0.5

    def test_exact_data_residuals_summable(self, diagonal_cubic_32, cubic_truth):
        """Verify partial sums of squared residuals stay bounded for exact data."""
        y = diagonal_cubic_32.evaluate(cubic_truth)
        trace = nl_landweber(diagonal_cubic_32, y, 0.0, 2.5, np.zeros(32), 2000)
        sums = trace.summed_squared_residuals

        assert np.all(np.diff(sums) >= 0)
        assert sums[-1] - sums[len(sums) // 2] < sums[len(sums) // 2]

    def test_divergence_detected(self):
        """Verify an inconsistent derivative triggers DivergenceError."""
        problem = NonlinearProblem(
            name="wrong_sign",
            forward=lambda x: -x,
            derivative=lambda x: np.eye(x.size),
            domain_radius=np.inf,
            center=np.zeros(3),
        )
        with pytest.raises(DivergenceError):
            nl_landweber(problem, np.ones(3), 1e-6, 2.5, np.zeros(3), 1000, reference=np.zeros(3))

    def test_stalled_iterate_reports_stagnation(self):
        """Verify a vanishing gradient step ends the run with stop reason stagnation."""
        problem = NonlinearProblem(
            name="square",
            forward=lambda x: x**2,
            derivative=lambda x: np.diag(2.0 * x),
            domain_radius=np.inf,
            center=np.zeros(4),
        )
        trace = nl_landweber(problem, np.ones(4), 1e-3, 2.5, np.zeros(4), 1000)

        assert trace.stop_reason is StopReason.STAGNATION
        assert trace.n_steps == 1
        assert trace.residual_norms[-1] == pytest.approx(2.0)
        np.testing.assert_array_equal(trace.x, np.zeros(4))

    def test_tau_checked_against_eta(self, diagonal_cubic_32):
        """Verify tau below the eta threshold raises ParameterError."""
        with pytest.raises(ParameterError):
            nl_landweber(diagonal_cubic_32, np.zeros(32), 1e-3, 2.0, np.zeros(32), 10, eta=0.1)


class TestLevenbergMarquardt:
    """Test Levenberg-Marquardt with the residual-ratio alpha rule."""

    @pytest.mark.parametrize("sigma", [0.3, 0.5, 0.7, 0.9])
    def test_scalar_closed_form(self, sigma):
        """Verify alpha = sigma/(1 - sigma) for F(x) = x."""
        alpha, value = lm_alpha(np.array([1.0]), np.array([2.0]), 0.0, 2.0 * sigma)

        assert alpha == pytest.approx(sigma / (1.0 - sigma), rel=1e-8)
        assert value == pytest.approx(2.0 * sigma, rel=1e-10)

    def test_unreachable_target_raises(self):
        """Verify a target below the orthogonal residual raises AlphaRuleError."""
        with pytest.raises(AlphaRuleError) as err:
            lm_alpha(np.array([1.0]), np.array([1.0]), 0.5, 0.4)

        assert err.value.attainable[0] == 0.5

    def test_ratio_equals_sigma_each_step(self, diagonal_cubic_32, cubic_truth):
        """Verify every accepted step has linearized-to-actual residual ratio sigma."""
        delta = 1e-4
        noisy = add_noise_exact(diagonal_cubic_32.evaluate(cubic_truth), delta, RandomSource(seed=2))
        trace = levenberg_marquardt(diagonal_cubic_32, noisy, delta, 1.5, 0.7, np.zeros(32), 500)

        assert trace.stop_reason is StopReason.DISCREPANCY
        np.testing.assert_allclose(trace.ratios, 0.7, atol=1e-8)

    def test_stopping_index_grows_logarithmically(self, diagonal_cubic_32, cubic_truth):
        """Verify N(delta/10) - N(delta) <= 25 across three decades."""
        y = diagonal_cubic_32.evaluate(cubic_truth)
        steps = []
        for delta in (1e-2, 1e-3, 1e-4, 1e-5):
            noisy = add_noise_exact(y, delta, RandomSource(seed=6))
            steps.append(levenberg_marquardt(diagonal_cubic_32, noisy, delta, 1.5, 0.7, np.zeros(32), 500).n_steps)

        assert all(later - earlier <= 25 for earlier, later in zip(steps, steps[1:], strict=False))

    def test_tau_must_exceed_inverse_sigma(self, diagonal_cubic_32):
        """Verify tau <= 1/sigma raises ParameterError."""
        with pytest.raises(ParameterError):
            levenberg_marquardt(diagonal_cubic_32, np.zeros(32), 1e-3, 1.2, 0.7, np.zeros(32), 10)


class TestIrgn:
    """Test the iteratively regularized Gauss-Newton method."""

    def test_linear_problem_matches_shifted_tikhonov(self, integration_64, smooth_data_64):
        """Verify each IRGN iterate on a linear map is Tikhonov with prior x0."""
        _, y = smooth_data_64
        x0 = np.full(64, 0.25)
        trace = irgn(make_linear_forward(integration_64.a), y, 1e-2, 1.0, x0, 1.0, 2.0, 1.0, 100)
        expected = tikhonov_solve(integration_64.a, y, float(trace.alphas[-1]), x0=x0)

        assert np.linalg.norm(trace.x - expected) <= 1e-10 * np.linalg.norm(expected)

    def test_stopping_index(self):
        """Verify the first n with (alpha0 q^-n)^((nu+1)/2) <= tau delta."""
        assert irgn_stopping_index(1e-2, 1.0, 1.0, 2.0, 1.0) == 7

    def test_stopping_index_over_delta_sweep(self, harmonic_cubic):
        """Verify N follows log_q(1/delta) in steps of three or four per decade and the residual tracks delta."""
        problem, truth = harmonic_cubic
        y = problem.evaluate(truth)
        steps = []
        for delta in (1e-2, 1e-3, 1e-4, 1e-5):
            noisy = add_noise_exact(y, delta, RandomSource(seed=9))
            trace = irgn(problem, noisy, delta, 1.0, np.zeros(32), 1.0, 2.0, 1.0, 200, reference=truth)
            assert trace.residual_norms.size == trace.n_steps + 1
            assert trace.residual_norms[-1] <= 5.0 * delta
            steps.append(trace.n_steps)

        assert steps == [7, 10, 14, 17]
        assert all(later - earlier in (3, 4) for earlier, later in zip(steps, steps[1:], strict=False))

    def test_budget_exceeded_raises(self, diagonal_cubic_32):
        """Verify a stopping index beyond max_iter raises ConvergenceError."""
        with pytest.raises(ConvergenceError):
            irgn(diagonal_cubic_32, np.zeros(32), 1e-6, 1.0, np.zeros(32), 1.0, 2.0, 1.0, 3)

    def test_nu_range_enforced(self, diagonal_cubic_32):
        """Verify nu outside [1, 2] raises ParameterError."""
        with pytest.raises(ParameterError):
            irgn(diagonal_cubic_32, np.zeros(32), 1e-3, 1.0, np.zeros(32), 1.0, 2.0, 0.5, 100)

    @pytest.mark.performance
    def test_rate_for_first_order_source(self, diagonal_cubic_32, cubic_truth):
        """Verify the error slope against delta lies in [0.3, 0.7] for nu = 1."""
        y = diagonal_cubic_32.evaluate(cubic_truth)
        records = []
        for delta in (1e-2, 1e-3, 1e-4, 1e-5):
            for seed in range(3):
                noisy = add_noise_exact(y, delta, RandomSource(seed=seed))
                trace = irgn(diagonal_cubic_32, noisy, delta, 1.0, np.zeros(32), 1.0, 2.0, 1.0, 200)
                records.append(
                    RunRecord(
                        delta=delta,
                        alpha_or_n=trace.n_steps,
                        error=float(np.linalg.norm(trace.x - cubic_truth)),
                        residual=float(trace.residual_norms[-1]),
                        rule="apriori",
                        method="irgn",
                        seed=seed,
                    )
                )

        assert 0.3 <= fit_rate(records).slope <= 0.7

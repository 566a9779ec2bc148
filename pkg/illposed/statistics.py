"""Frequentist sequence space estimation: simulation, risk and the Pinsker minimax estimator."""

from __future__ import annotations

import logging

import numpy as np
from scipy.optimize import brentq

from .const import PINSKER_CROSS_CHECK_TOLERANCE
from .exceptions import ParameterError, ShapeError
from .linalg import as_vector
from .models.estimator import LinearEstimator, PinskerSolution, SequenceModel
from .models.filter import Filter
from .models.singular_system import RandomSource

_LOGGER = logging.getLogger(__name__)


def simulate_sequence(model: SequenceModel, src: RandomSource) -> np.ndarray:
    """Draw x_n^delta = x_n + (delta/sigma_n) xi_n."""
    xi = src.generator.standard_normal(model.size)
    return model.x_coeffs + (model.delta / model.sigma) * xi


def _check_lengths(estimator: LinearEstimator, model: SequenceModel) -> None:
    if estimator.gamma.size != model.size:
        raise ShapeError(f"estimator has {estimator.gamma.size} weights, model has {model.size} modes")


def risk_decomposition(estimator: LinearEstimator, model: SequenceModel) -> tuple[float, float]:
    """Squared bias sum (1 - gamma_n)^2 x_n^2 and variance delta^2 sum gamma_n^2 / sigma_n^2."""
    _check_lengths(estimator, model)
    gamma = estimator.gamma
    bias = float(np.sum((1.0 - gamma) ** 2 * model.x_coeffs**2))
    variance = float(model.delta**2 * np.sum(gamma**2 / model.sigma**2))
    return bias, variance


def risk_closed_form(estimator: LinearEstimator, model: SequenceModel) -> float:
    """Expected squared error of a linear estimator, bias plus variance."""
    bias, variance = risk_decomposition(estimator, model)
    return bias + variance


def risk_monte_carlo(
    estimator: LinearEstimator, model: SequenceModel, m: int, src: RandomSource
) -> tuple[float, float]:
    """Sample mean of ||x_gamma - x_dag||^2 over ``m`` simulations and its standard error."""
    _check_lengths(estimator, model)
    if m < 2:
        raise ParameterError(f"Monte Carlo risk needs at least 2 samples, got {m}")
    xi = src.generator.standard_normal((m, model.size))
    observations = model.x_coeffs + (model.delta / model.sigma) * xi
    losses = np.sum((estimator.gamma * observations - model.x_coeffs) ** 2, axis=1)
    return float(np.mean(losses)), float(np.std(losses, ddof=1) / np.sqrt(m))


def filter_estimator(filt: Filter, alpha: float, sigma) -> LinearEstimator:
    """Linear estimator induced by a spectral filter."""
    return LinearEstimator.from_filter(filt, alpha, as_vector(sigma, "sigma"))


def sup_risk(gamma, sigma, nu: float, rho: float, delta: float) -> float:
    """Worst-case risk over the ellipsoid sum sigma_n^-2nu x_n^2 <= rho^2.

    The bias is linear in x_n^2, so its maximum puts all mass on the worst mode.
    """
    gamma = as_vector(gamma, "gamma")
    sigma = as_vector(sigma, "sigma", size=gamma.size)
    bias = rho**2 * float(np.max((1.0 - gamma) ** 2 * sigma ** (2.0 * nu)))
    return bias + delta**2 * float(np.sum(gamma**2 / sigma**2))


def _pinsker_equation(kappa: float, a: np.ndarray, weights: np.ndarray, rho: float, delta: float) -> float:
    return kappa * rho**2 - delta**2 * float(np.sum(weights * np.maximum(0.0, 1.0 - kappa * a)))


def _explicit_kappa(a: np.ndarray, sigma: np.ndarray, rho: float, delta: float) -> float:
    """kappa from the largest N with delta^2 sum_{n<=N} sigma_n^-2 a_n (a_N - a_n) <= rho^2."""
    order = np.argsort(a, kind="stable")
    a_sorted, inv_var = a[order], sigma[order] ** -2.0
    best = 1
    for n in range(1, a.size + 1):
        head = slice(0, n)
        if delta**2 * np.sum(inv_var[head] * a_sorted[head] * (a_sorted[n - 1] - a_sorted[head])) <= rho**2:
            best = n
    head = slice(0, best)
    s1 = float(np.sum(inv_var[head] * a_sorted[head]))
    s2 = float(np.sum(inv_var[head] * a_sorted[head] ** 2))
    return delta**2 * s1 / (rho**2 + delta**2 * s2)


def pinsker(sigma, nu: float, rho: float, delta: float) -> PinskerSolution:
    """Linear minimax weights over the source ellipsoid.

    kappa solves kappa rho^2 = delta^2 sum (a_n/sigma_n^2) max(0, 1 - kappa a_n)
    with a_n = sigma_n^-nu; the left minus right side increases strictly, so
    the root in (0, 1/min a_n) is unique. The root is polished by the closed
    form on its active set and cross-checked against the explicit formula.
    """
    sigma = as_vector(sigma, "sigma")
    for label, value in (("nu", nu), ("rho", rho), ("delta", delta)):
        if value <= 0:
            raise ParameterError(f"{label} must be positive, got {value}")
    if sigma.size == 0 or np.any(sigma <= 0):
        raise ParameterError("Pinsker weights need positive singular values")

    a = sigma**-nu
    weights = a / sigma**2
    upper = 1.0 / float(np.min(a))
    try:
        root = brentq(_pinsker_equation, 0.0, upper, args=(a, weights, rho, delta), xtol=1e-300, rtol=1e-15)
    except ValueError as err:
        raise ParameterError(f"Pinsker equation is not bracketed on [0, {upper:.6g}]") from err

    active = root * a < 1.0
    s1 = float(np.sum(weights[active]))
    s2 = float(np.sum(weights[active] * a[active]))
    kappa = delta**2 * s1 / (rho**2 + delta**2 * s2)
    gamma = np.maximum(0.0, 1.0 - kappa * a)
    residual = _pinsker_equation(kappa, a, weights, rho, delta)

    explicit = _explicit_kappa(a, sigma, rho, delta)
    if abs(explicit - kappa) > PINSKER_CROSS_CHECK_TOLERANCE * kappa:
        _LOGGER.warning("Explicit Pinsker parameter %.12g disagrees with root %.12g", explicit, kappa)

    minimax_value = float(delta**2 * np.sum(gamma / sigma**2))
    _LOGGER.debug("Pinsker kappa=%.6g with %d active modes", kappa, int(np.count_nonzero(gamma)))
    return PinskerSolution(
        kappa=kappa,
        gamma=gamma,
        n_active=int(np.count_nonzero(gamma)),
        minimax_value=minimax_value,
        residual=residual,
        explicit_kappa=explicit,
    )


def least_favorable(solution: PinskerSolution, sigma, nu: float, delta: float) -> np.ndarray:
    """Coefficients with x_n^2 = (delta^2/kappa) sigma_n^(nu-2) gamma_n, the saddle point of the minimax risk."""
    sigma = as_vector(sigma, "sigma", size=solution.gamma.size)
    return np.sqrt(delta**2 / solution.kappa * sigma ** (nu - 2.0) * solution.gamma)


def pinsker_tsvd_dimension(solution: PinskerSolution, sigma, nu: float) -> int:
    """Number of modes with sigma_n^nu >= 2 kappa; truncating there is within a factor 4 of the minimax risk."""
    sigma = as_vector(sigma, "sigma")
    return int(np.count_nonzero(sigma**nu >= 2.0 * solution.kappa))


def tsvd_minimax_dimension(delta: float, mu: float, nu: float, c_n: float = 1.0) -> int:
    """round(c_N delta^(-2/(2 mu (nu+1) + 1))), at least 1, for sigma_n ~ n^-mu."""
    for label, value in (("delta", delta), ("mu", mu), ("nu", nu), ("c_N", c_n)):
        if value <= 0:
            raise ParameterError(f"{label} must be positive, got {value}")
    return max(1, round(c_n * delta ** (-2.0 / (2.0 * mu * (nu + 1.0) + 1.0))))

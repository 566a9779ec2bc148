"""Gaussian linear Bayesian inversion: MAP, posterior, conditional mean and HPD sets."""

from __future__ import annotations

import logging

import numpy as np
from scipy.stats import chi2

from .const import LOW_ESS_WARNING
from .exceptions import DegeneracyError, ParameterError
from .linalg import as_matrix, as_vector, solve_spd
from .models.posterior import CredibleSet, GaussianPosterior, WeightSummary
from .models.singular_system import RandomSource
from .spectral import tikhonov_solve

_LOGGER = logging.getLogger(__name__)


def _check_scales(delta: float, sigma_prior: float) -> None:
    if delta <= 0 or sigma_prior <= 0:
        raise ParameterError(f"delta and sigma_prior must be positive, got {delta} and {sigma_prior}")


def map_estimate(t, y_delta, delta: float, sigma_prior: float) -> np.ndarray:
    """Maximum a posteriori estimate, Tikhonov with alpha = delta^2 / sigma_prior^2."""
    _check_scales(delta, sigma_prior)
    return tikhonov_solve(t, y_delta, (delta / sigma_prior) ** 2)


def posterior(t, y_delta, delta: float, sigma_prior: float) -> GaussianPosterior:
    """Exact Gaussian posterior for a N(0, sigma_prior^2 I) prior and N(0, delta^2 I) noise."""
    _check_scales(delta, sigma_prior)
    t = as_matrix(t, "T")
    y_delta = as_vector(y_delta, "y_delta", size=t.shape[0])
    precision = t.T @ t
    precision[np.diag_indices_from(precision)] += (delta / sigma_prior) ** 2
    covariance = delta**2 * solve_spd(precision, np.eye(t.shape[1]))
    covariance = 0.5 * (covariance + covariance.T)
    mean = map_estimate(t, y_delta, delta, sigma_prior)
    return GaussianPosterior(mean=mean, covariance=covariance, delta=float(delta), sigma_prior=float(sigma_prior))


def sample_posterior(post: GaussianPosterior, count: int, src: RandomSource) -> np.ndarray:
    """Draw ``count`` posterior samples (one per row) through the symmetric square root."""
    if count < 1:
        raise ParameterError(f"count must be positive, got {count}")
    xi = src.generator.standard_normal((count, post.dim))
    return post.mean + xi @ post.square_root


def cm_monte_carlo(
    t,
    y_delta,
    delta: float,
    sigma_prior: float,
    n_samples: int,
    src: RandomSource,
) -> tuple[np.ndarray, WeightSummary]:
    """Conditional mean by importance sampling from the prior.

    Weights are w_i = exp(-||T x_i - y||^2 / (2 delta^2)); they are normalized
    after shifting by the largest log weight. Raises DegeneracyError when every
    unshifted weight underflows.
    """
    _check_scales(delta, sigma_prior)
    if n_samples < 2:
        raise ParameterError(f"n_samples must be at least 2, got {n_samples}")
    t = as_matrix(t, "T")
    y_delta = as_vector(y_delta, "y_delta", size=t.shape[0])

    draws = sigma_prior * src.generator.standard_normal((n_samples, t.shape[1]))
    log_weights = -np.sum((draws @ t.T - y_delta) ** 2, axis=1) / (2.0 * delta**2)
    top = float(np.max(log_weights))
    if top < np.log(np.finfo(float).tiny):
        raise DegeneracyError(
            f"all {n_samples} importance weights underflow (largest log weight {top:.4g}); "
            "increase delta or the number of samples"
        )
    weights = np.exp(log_weights - top)
    total = float(np.sum(weights))
    estimate = weights @ draws / total
    ess = total
    if ess < LOW_ESS_WARNING:
        _LOGGER.warning("Conditional mean rests on an effective sample size of %.3g", ess)
    _LOGGER.debug("Conditional mean from %d samples, ESS %.4g", n_samples, ess)
    return estimate, WeightSummary(effective_sample_size=ess, n_samples=n_samples, max_log_weight=top)


def hpd_credible_set(post: GaussianPosterior, alpha: float) -> CredibleSet:
    """Highest posterior density set of mass 1 - alpha, an ellipsoid with chi-square radius."""
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    radius_sq = float(chi2.ppf(1.0 - alpha, post.dim))
    eta = 0.5 * (post.dim * np.log(2.0 * np.pi) + post.log_det + radius_sq)
    return CredibleSet(radius=float(np.sqrt(radius_sq)), eta_threshold=float(eta), level=1.0 - alpha)


def coverage(post: GaussianPosterior, credible: CredibleSet, samples: np.ndarray) -> float:
    """Fraction of sample rows inside the credible ellipsoid."""
    inside = post.mahalanobis_squared(np.atleast_2d(samples)) <= credible.radius**2
    return float(np.mean(inside))

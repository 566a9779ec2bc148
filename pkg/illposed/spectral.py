"""Spectral filter regularization, Tikhonov solves with value functions and linear Landweber."""

from __future__ import annotations

import logging

import numpy as np

from .const import DEFAULT_OMEGA_FACTOR, QUALIFICATION_SAMPLES, VALUE_FUNCTION_FLAT_TOLERANCE
from .exceptions import MonotonicityError, ParameterError
from .linalg import as_matrix, as_vector, solve_spd, svd
from .models.filter import Filter, ValueFunctions, landweber_steps
from .models.singular_system import SingularSystem
from .models.trace import LandweberRun, StopReason

_LOGGER = logging.getLogger(__name__)

__all__ = [
    "Filter",
    "approximation_bound",
    "default_omega",
    "filter_amplification",
    "filter_apply",
    "landweber_run",
    "landweber_steps",
    "qualification_scan",
    "tikhonov_solve",
    "value_derivative_error",
    "value_functions",
]


def filter_apply(filt: Filter, alpha: float, system: SingularSystem, y) -> np.ndarray:
    """R_alpha y = sum phi_alpha(sigma_n^2) sigma_n <y, u_n> v_n."""
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    y = as_vector(y, "y", size=system.shape[0])
    weights = filt.phi(alpha, system.sigma**2) * system.sigma
    return system.v @ (weights * system.data_coefficients(y))


def filter_amplification(filt: Filter, alpha: float, system: SingularSystem) -> float:
    """Largest mode amplification sigma_n phi_alpha(sigma_n^2), the norm of R_alpha on the spectrum."""
    if system.rank == 0:
        return 0.0
    return float(np.max(np.abs(system.sigma * filt.phi(alpha, system.sigma**2))))


def tikhonov_solve(a, y, alpha: float, x0=None) -> np.ndarray:
    """Solve (A^T A + alpha I) x = A^T y + alpha x0 by Cholesky.

    With ``x0`` this is the minimizer of ||A x - y||^2 + alpha ||x - x0||^2.
    """
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    a = as_matrix(a, "A")
    y = as_vector(y, "y", size=a.shape[0])
    rhs = a.T @ y
    if x0 is not None:
        rhs = rhs + alpha * as_vector(x0, "x0", size=a.shape[1])
    normal = a.T @ a
    normal[np.diag_indices_from(normal)] += alpha
    return solve_spd(normal, rhs)


def default_omega(sigma_max: float) -> float:
    """Relaxation 0.9 / sigma_1^2."""
    return DEFAULT_OMEGA_FACTOR / sigma_max**2


def landweber_run(
    a,
    y,
    omega: float | None = None,
    *,
    delta: float | None = None,
    tau: float | None = None,
    max_iter: int = 1000,
    reference=None,
    sigma_max: float | None = None,
) -> LandweberRun:
    """Linear Landweber iteration x_n = x_{n-1} + omega A^T (y - A x_{n-1}) from x_0 = 0.

    With ``delta`` and ``tau`` the iteration stops at the first N with
    ||A x_N - y|| <= tau delta (possibly N = 0); otherwise it runs ``max_iter``
    steps. ``reference`` adds the error history ||x_n - reference||.
    """
    a = as_matrix(a, "A")
    y = as_vector(y, "y", size=a.shape[0])
    if sigma_max is None:
        system = svd(a)
        sigma_max = float(system.sigma[0]) if system.rank else 0.0
    if sigma_max <= 0:
        raise ParameterError("Landweber needs a nonzero operator")
    if omega is None:
        omega = default_omega(sigma_max)
    if not 0 < omega < 1.0 / sigma_max**2:
        raise ParameterError(f"omega must lie in (0, {1.0 / sigma_max**2:.6g}), got {omega}")
    if (delta is None) != (tau is None):
        raise ParameterError("discrepancy stopping needs both delta and tau")
    threshold = None if delta is None else tau * delta
    if reference is not None:
        reference = as_vector(reference, "reference", size=a.shape[1])

    x = np.zeros(a.shape[1])
    residual = y.copy()
    residuals = [float(np.linalg.norm(residual))]
    errors = None if reference is None else [float(np.linalg.norm(reference))]
    stop_reason = StopReason.MAX_ITER
    steps = 0

    if threshold is not None and residuals[0] <= threshold:
        stop_reason = StopReason.DISCREPANCY
    else:
        for steps in range(1, max_iter + 1):
            x = x + omega * (a.T @ residual)
            residual = y - a @ x
            residuals.append(float(np.linalg.norm(residual)))
            if errors is not None:
                errors.append(float(np.linalg.norm(x - reference)))
            if threshold is not None and residuals[-1] <= threshold:
                stop_reason = StopReason.DISCREPANCY
                break

    if threshold is not None and stop_reason is StopReason.MAX_ITER:
        _LOGGER.warning("Landweber hit %d iterations with residual %.6g above %.6g", max_iter, residuals[-1], threshold)
    _LOGGER.debug("Landweber stopped after %d steps (%s), residual %.6g", steps, stop_reason, residuals[-1])
    return LandweberRun(
        x=x,
        n_steps=steps,
        omega=omega,
        stop_reason=stop_reason,
        residual_norms=np.array(residuals),
        error_norms=None if errors is None else np.array(errors),
    )


def approximation_bound(filt: Filter, nu: float, alpha: float, lambdas: np.ndarray) -> float:
    """omega_nu(alpha) = max over the sampled lambda of lambda^(nu/2) |r_alpha(lambda)|."""
    return float(np.max(lambdas ** (nu / 2.0) * np.abs(filt.residual(alpha, lambdas))))


def qualification_scan(filt: Filter, nu: float, alphas, lambda_max: float) -> float:
    """Log-log slope of omega_nu(alpha) against alpha.

    The slope is nu/2 up to the qualification and saturates at half the
    qualification beyond it. lambda runs over a log grid from 1e-6 min(alpha)
    to ``lambda_max``.
    """
    if nu <= 0:
        raise ParameterError(f"nu must be positive, got {nu}")
    alphas = as_vector(alphas, "alphas")
    if alphas.size < 2:
        raise ParameterError("qualification scan needs at least two alphas")
    lambdas = np.geomspace(np.min(alphas) * 1e-6, lambda_max, QUALIFICATION_SAMPLES)
    bounds = np.array([approximation_bound(filt, nu, alpha, lambdas) for alpha in alphas])
    slope = float(np.polyfit(np.log(alphas), np.log(bounds), 1)[0])
    _LOGGER.debug("Qualification scan for %s with nu=%s: slope %.4f", filt.name, nu, slope)
    return slope


def value_functions(a, y_delta, alphas) -> ValueFunctions:
    """f, g and j = f + alpha g of Tikhonov regularization over an increasing grid.

    Raises MonotonicityError when f decreases or g increases along the grid.
    """
    a = as_matrix(a, "A")
    y_delta = as_vector(y_delta, "y_delta", size=a.shape[0])
    alphas = as_vector(alphas, "alphas")
    if np.any(np.diff(alphas) <= 0):
        raise ParameterError("alphas must be strictly increasing")

    f = np.empty(alphas.size)
    g = np.empty(alphas.size)
    for i, alpha in enumerate(alphas):
        x = tikhonov_solve(a, y_delta, alpha)
        f[i] = 0.5 * float(np.sum((a @ x - y_delta) ** 2))
        g[i] = 0.5 * float(np.sum(x**2))

    slack = 1e-12 * max(float(np.max(f, initial=0.0)), float(np.max(g, initial=0.0)), np.finfo(float).tiny)
    if np.any(np.diff(f) < -slack):
        raise MonotonicityError("residual value function f decreases in alpha")
    if np.any(np.diff(g) > slack):
        raise MonotonicityError("penalty value function g increases in alpha")
    return ValueFunctions(alphas=alphas, f=f, g=g, j=f + alphas * g)


def value_derivative_error(values: ValueFunctions) -> np.ndarray:
    """Relative gap between central differences of j and g at interior nodes.

    Nodes where g barely varies are reported as nan.
    """
    alphas, g, j = values.alphas, values.g, values.j
    errors = np.full(alphas.size, np.nan)
    for i in range(1, alphas.size - 1):
        if g[i] == 0 or abs(g[i + 1] - g[i - 1]) < VALUE_FUNCTION_FLAT_TOLERANCE * g[i]:
            continue
        slope = (j[i + 1] - j[i - 1]) / (alphas[i + 1] - alphas[i - 1])
        errors[i] = abs(slope - g[i]) / g[i]
    return errors


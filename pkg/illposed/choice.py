"""Parameter choice rules: a priori, discrepancy principle and heuristic rules.

Heuristic rules carry no convergence guarantee for worst-case noise; they are
minimized over the caller's finite grid.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np

from .const import (
    DEFAULT_GRID_RATIO,
    RULE_HANKE_RAUS,
    RULE_L_CURVE,
    RULE_MOROZOV,
    RULE_QUASI_OPTIMALITY,
)
from .exceptions import DiscrepancyExhaustedError, MonotonicityError, ParameterError
from .linalg import as_matrix, as_vector
from .models.filter import Filter
from .models.outcome import ChoiceOutcome
from .models.singular_system import SingularSystem

_LOGGER = logging.getLogger(__name__)

_TIE_TOLERANCE = 1e-12


def geometric_grid(alpha0: float, count: int, q: float = DEFAULT_GRID_RATIO) -> np.ndarray:
    """alpha_n = alpha0 q^n for n = 0..count-1, decreasing for 0 < q < 1."""
    if alpha0 <= 0:
        raise ParameterError(f"alpha0 must be positive, got {alpha0}")
    if not 0 < q < 1:
        raise ParameterError(f"grid ratio must lie in (0, 1), got {q}")
    if count < 1:
        raise ParameterError(f"grid needs at least one point, got {count}")
    return alpha0 * q ** np.arange(count)


def apriori_alpha(delta: float, rho: float, nu: float, c: float = 1.0) -> float:
    """alpha = c (delta/rho)^(2/(nu+1)), the order-optimal a priori choice."""
    for label, value in (("delta", delta), ("rho", rho), ("nu", nu), ("c", c)):
        if value <= 0:
            raise ParameterError(f"{label} must be positive, got {value}")
    return c * (delta / rho) ** (2.0 / (nu + 1.0))


def morozov(
    a,
    y_delta,
    delta: float,
    tau: float,
    alphas,
    solver: Callable[[float], np.ndarray],
    check_monotone: bool = True,
) -> ChoiceOutcome:
    """Discrepancy principle on a decreasing grid.

    Returns the first alpha whose residual ||A x_alpha - y_delta|| is at most
    tau delta. If already the largest alpha qualifies it is returned flagged.
    With ``check_monotone`` the scanned residuals must not increase as alpha
    decreases.
    """
    if tau <= 1:
        raise ParameterError(f"tau must exceed 1, got {tau}")
    a = as_matrix(a, "A")
    y_delta = as_vector(y_delta, "y_delta", size=a.shape[0])
    alphas = as_vector(alphas, "alphas")
    if alphas.size == 0:
        raise ParameterError("discrepancy principle needs a nonempty grid")
    if np.any(np.diff(alphas) >= 0):
        raise ParameterError("discrepancy principle needs a strictly decreasing grid")

    threshold = tau * delta
    residuals: list[float] = []
    for i, alpha in enumerate(alphas):
        residual = float(np.linalg.norm(a @ solver(float(alpha)) - y_delta))
        if check_monotone and residuals and residual > residuals[-1] * (1 + _TIE_TOLERANCE) + _TIE_TOLERANCE * delta:
            raise MonotonicityError(
                f"residual grew from {residuals[-1]:.6g} to {residual:.6g} as alpha decreased to {alpha:.6g}"
            )
        residuals.append(residual)
        _LOGGER.debug("Discrepancy scan alpha=%.6g residual=%.6g threshold=%.6g", alpha, residual, threshold)
        if residual <= threshold:
            flagged = i == 0
            if flagged:
                _LOGGER.warning("Largest grid alpha %.6g already satisfies the discrepancy bound", alpha)
            _LOGGER.info("Discrepancy principle selected alpha=%.6g (residual %.6g)", alpha, residual)
            return ChoiceOutcome(
                alpha=float(alpha),
                rule=RULE_MOROZOV,
                index=i,
                residual=residual,
                scan={"alphas": alphas[: i + 1], "residuals": np.array(residuals)},
                flagged=flagged,
                note="largest grid alpha already satisfies the bound" if flagged else "",
            )

    raise DiscrepancyExhaustedError(
        f"no grid alpha reaches residual {threshold:.6g}; final residual {residuals[-1]:.6g} at alpha {alphas[-1]:.6g}",
        final_residual=residuals[-1],
        alpha=float(alphas[-1]),
    )


def _argmin_preferring_large_alpha(alphas: np.ndarray, values: np.ndarray) -> int:
    """Index of the smallest value; among ties the one with the largest alpha."""
    best = float(np.min(values))
    ties = np.flatnonzero(values <= best + _TIE_TOLERANCE * abs(best))
    return int(ties[np.argmax(alphas[ties])])


def quasi_optimality(alphas, solutions: Sequence[np.ndarray] | np.ndarray) -> ChoiceOutcome:
    """Pick alpha_n minimizing ||x_{alpha_{n+1}} - x_{alpha_n}|| over a decreasing grid."""
    alphas = as_vector(alphas, "alphas")
    solutions = np.asarray(solutions, dtype=float)
    if alphas.size < 2:
        raise ParameterError(f"quasi-optimality needs at least 2 grid points, got {alphas.size}")
    if solutions.shape[0] != alphas.size:
        raise ParameterError(f"{solutions.shape[0]} solutions for {alphas.size} grid points")
    differences = np.linalg.norm(np.diff(solutions, axis=0), axis=1)
    index = _argmin_preferring_large_alpha(alphas[:-1], differences)
    _LOGGER.info("Quasi-optimality selected alpha=%.6g", alphas[index])
    return ChoiceOutcome(
        alpha=float(alphas[index]),
        rule=RULE_QUASI_OPTIMALITY,
        index=index,
        scan={"alphas": alphas, "differences": differences},
    )


def hanke_raus(alphas, residuals) -> ChoiceOutcome:
    """Pick the minimizer of ||A x_alpha - y_delta|| / sqrt(alpha)."""
    alphas = as_vector(alphas, "alphas")
    residuals = as_vector(residuals, "residuals", size=alphas.size)
    if alphas.size == 0:
        raise ParameterError("Hanke-Raus rule needs a nonempty grid")
    psi = residuals / np.sqrt(alphas)
    index = _argmin_preferring_large_alpha(alphas, psi)
    _LOGGER.info("Hanke-Raus selected alpha=%.6g", alphas[index])
    return ChoiceOutcome(
        alpha=float(alphas[index]),
        rule=RULE_HANKE_RAUS,
        index=index,
        residual=float(residuals[index]),
        scan={"alphas": alphas, "psi": psi},
    )


def l_curve(alphas, residuals, solution_norms) -> ChoiceOutcome:
    """Pick the minimizer of ||x_alpha|| ||A x_alpha - y_delta||."""
    alphas = as_vector(alphas, "alphas")
    residuals = as_vector(residuals, "residuals", size=alphas.size)
    solution_norms = as_vector(solution_norms, "solution_norms", size=alphas.size)
    if alphas.size == 0:
        raise ParameterError("L-curve rule needs a nonempty grid")
    product = residuals * solution_norms
    index = _argmin_preferring_large_alpha(alphas, product)
    _LOGGER.info("L-curve selected alpha=%.6g", alphas[index])
    return ChoiceOutcome(
        alpha=float(alphas[index]),
        rule=RULE_L_CURVE,
        index=index,
        residual=float(residuals[index]),
        scan={"alphas": alphas, "product": product},
    )


def filter_scan(filt: Filter, alphas, system: SingularSystem, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Filtered solutions over a grid with their residual and solution norms.

    Returns (solutions, residual_norms, solution_norms) with one row of
    ``solutions`` per alpha.
    """
    alphas = as_vector(alphas, "alphas")
    y = as_vector(y, "y", size=system.shape[0])
    coeffs = system.data_coefficients(y)
    outside = float(np.linalg.norm(y - system.u @ coeffs))
    lam = system.sigma**2
    solutions = np.empty((alphas.size, system.shape[1]))
    residual_norms = np.empty(alphas.size)
    for i, alpha in enumerate(alphas):
        gains = filt.phi(alpha, lam) * lam
        solutions[i] = system.v @ (gains / system.sigma * coeffs)
        residual_norms[i] = np.hypot(np.linalg.norm((1.0 - gains) * coeffs), outside)
    return solutions, residual_norms, np.linalg.norm(solutions, axis=1)


def oracle_index(solutions: np.ndarray, x_dag) -> int:
    """Grid index with the smallest error to a known solution."""
    errors = np.linalg.norm(np.asarray(solutions) - np.asarray(x_dag), axis=1)
    return int(np.argmin(errors))

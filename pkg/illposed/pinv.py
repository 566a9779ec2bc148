"""Moore-Penrose pseudoinverse, Picard diagnostics and spectral operator functions."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from .const import PICARD_CONVERGING_RATIO, PICARD_DIVERGING_RATIO
from .exceptions import ParameterError
from .linalg import as_vector, svd
from .models.outcome import PicardReport, PicardVerdict
from .models.singular_system import SingularSystem

_LOGGER = logging.getLogger(__name__)


def pseudoinverse_apply(system: SingularSystem, y) -> np.ndarray:
    """x_dag = sum sigma_n^-1 <y, u_n> v_n over the retained singular triples."""
    y = as_vector(y, "y", size=system.shape[0])
    return system.v @ (system.data_coefficients(y) / system.sigma)


def min_norm_solution(a, y) -> np.ndarray:
    """Minimum-norm least-squares solution of A x = y."""
    return pseudoinverse_apply(svd(a), y)


def _geometric_mean(values: np.ndarray) -> float:
    floor = np.finfo(float).tiny
    return float(np.exp(np.mean(np.log(np.maximum(values, floor)))))


def picard_diagnostic(system: SingularSystem, y) -> PicardReport:
    """Partial sums of the Picard series with a heuristic convergence verdict.

    The verdict compares the geometric mean of the increments in the last
    quartile of the spectrum with that of the central quartile: a ratio above
    10 reads as diverging, below 0.1 as converging. Exactly zero data converge.
    """
    y = as_vector(y, "y", size=system.shape[0])
    coefficients = np.abs(system.data_coefficients(y))
    increments = (coefficients / system.sigma) ** 2
    partial_sums = np.cumsum(increments)

    rank = system.rank
    if not np.any(coefficients):
        return PicardReport(partial_sums, coefficients, PicardVerdict.CONVERGING, 0.0)
    if rank < 4:
        _LOGGER.warning("Picard verdict inconclusive: rank %d is too small to compare quartiles", rank)
        return PicardReport(partial_sums, coefficients, PicardVerdict.INCONCLUSIVE, float("nan"))

    middle = increments[(3 * rank) // 8 : max((5 * rank) // 8, (3 * rank) // 8 + 1)]
    last = increments[(3 * rank) // 4 :]
    ratio = _geometric_mean(last) / _geometric_mean(middle)

    if ratio > PICARD_DIVERGING_RATIO:
        verdict = PicardVerdict.DIVERGING
    elif ratio < PICARD_CONVERGING_RATIO:
        verdict = PicardVerdict.CONVERGING
    else:
        verdict = PicardVerdict.INCONCLUSIVE
        _LOGGER.warning("Picard verdict inconclusive: increment ratio %.3g", ratio)
    return PicardReport(partial_sums, coefficients, verdict, ratio)


def operator_function(
    system: SingularSystem,
    phi: Callable[[np.ndarray], np.ndarray],
    x,
    null_part=None,
) -> np.ndarray:
    """phi(A^T A) x = sum phi(sigma_n^2) <x, v_n> v_n + phi(0) * null_part.

    ``null_part`` is the caller's projection of x onto the kernel of A; it
    defaults to zero, which is exact for injective operators.
    """
    x = as_vector(x, "x", size=system.shape[1])
    values = np.broadcast_to(np.asarray(phi(system.sigma**2), dtype=float), system.sigma.shape)
    result = system.v @ (values * system.solution_coefficients(x))
    if null_part is not None:
        at_zero = float(np.asarray(phi(np.zeros(1)), dtype=float).reshape(-1)[0])
        result = result + at_zero * as_vector(null_part, "null_part", size=x.size)
    return result


def abs_power(system: SingularSystem, x, r: float) -> np.ndarray:
    """|A|^r x = (A^T A)^(r/2) x restricted to the orthogonal complement of the kernel."""
    return operator_function(system, lambda lam: lam ** (r / 2.0), x)


def interpolation_check(system: SingularSystem, x, r: float, s: float) -> tuple[float, float]:
    """Both sides of ||A|^s x|| <= ||A|^r x||^(s/r) ||x||^(1-s/r)."""
    if not r > s >= 0:
        raise ParameterError(f"interpolation needs r > s >= 0, got r={r}, s={s}")
    x = as_vector(x, "x", size=system.shape[1])
    lhs = float(np.linalg.norm(abs_power(system, x, s)))
    theta = s / r
    rhs = float(np.linalg.norm(abs_power(system, x, r)) ** theta * np.linalg.norm(x) ** (1.0 - theta))
    return lhs, rhs

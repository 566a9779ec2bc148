"""Discretization as regularization: least-squares and dual least-squares projection."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np

from .const import LSQ_ALARM_FACTOR, RANGE_TOLERANCE
from .exceptions import ParameterError, ShapeError, SubspaceError
from .linalg import as_matrix, as_vector, svd
from .models.outcome import DimensionChoice
from .models.singular_system import SingularSystem
from .models.subspace import LsqProjection, Subspace
from .pinv import pseudoinverse_apply

_LOGGER = logging.getLogger(__name__)


def lsq_projection_report(a, y, xn: Subspace) -> LsqProjection:
    """Least-squares projection onto X_n together with its boundedness proxy."""
    a = as_matrix(a, "A")
    y = as_vector(y, "y", size=a.shape[0])
    if xn.ambient_dim != a.shape[1]:
        raise ShapeError(f"subspace lives in dimension {xn.ambient_dim}, operator has {a.shape[1]} columns")
    system = svd(a @ xn.basis)
    coefficients = pseudoinverse_apply(system, y)
    proxy = float(np.linalg.norm(system.solution_coefficients(coefficients) / system.sigma))
    return LsqProjection(x=xn.basis @ coefficients, coefficients=coefficients, boundedness_proxy=proxy)


def lsq_projection(a, y, xn: Subspace) -> np.ndarray:
    """Minimum-norm least-squares solution of A x = y over x in X_n."""
    return lsq_projection_report(a, y, xn).x


def check_in_range(
    a, yn: Subspace, tolerance: float = RANGE_TOLERANCE, system: SingularSystem | None = None
) -> float:
    """Distance of the basis of Y_n from range(A); raises SubspaceError beyond ``tolerance``."""
    a = as_matrix(a, "A")
    if yn.ambient_dim != a.shape[0]:
        raise ShapeError(f"subspace lives in dimension {yn.ambient_dim}, operator has {a.shape[0]} rows")
    u = (system or svd(a)).u
    escape = float(np.max(np.linalg.norm(yn.basis - u @ (u.T @ yn.basis), axis=0), initial=0.0))
    if escape > tolerance:
        raise SubspaceError(f"Y_n leaves the range of A by {escape:.3g}")
    return escape


def dual_lsq_projection(a, y, yn: Subspace, system: SingularSystem | None = None) -> np.ndarray:
    """Minimum-norm solution of Q_n A x = Q_n y, Q_n the projection onto Y_n.

    The result lies in X_n = A^T Y_n; for exact data it is the projection of
    the minimum-norm solution onto X_n.
    """
    a = as_matrix(a, "A")
    y = as_vector(y, "y", size=a.shape[0])
    check_in_range(a, yn, system=system)
    projected = yn.basis.T @ a
    return pseudoinverse_apply(svd(projected), yn.basis.T @ y)


def image_subspace(a, yn: Subspace) -> Subspace:
    """X_n = A^T Y_n as an orthonormal subspace."""
    return Subspace.from_vectors(as_matrix(a, "A").T @ yn.basis)


def smallest_projected_singular(a, yn: Subspace) -> float:
    """mu_n, the smallest singular value of Q_n A for n = dim Y_n (zero if rank-deficient)."""
    a = as_matrix(a, "A")
    if yn.ambient_dim != a.shape[0]:
        raise ShapeError(f"subspace lives in dimension {yn.ambient_dim}, operator has {a.shape[0]} rows")
    system = svd(yn.basis.T @ a)
    if system.rank < yn.dim:
        return 0.0
    return float(system.sigma[-1])


def apriori_dimension(
    delta: float, mu_of_n: Callable[[int], float] | Sequence[float], cap: int | None = None
) -> DimensionChoice:
    """Largest n with mu_n > delta, scanning n = 1..cap.

    ``mu_of_n`` is a nonincreasing callable (1-based) or sequence. Returns n = 0
    flagged when even mu_1 does not exceed delta, and ``cap`` flagged when the
    scan never falls to delta.
    """
    if delta < 0:
        raise ParameterError(f"delta must be nonnegative, got {delta}")
    if callable(mu_of_n):
        lookup = mu_of_n
        if cap is None:
            raise ParameterError("a callable mu needs a cap")
    else:
        values = list(mu_of_n)
        cap = len(values) if cap is None else min(cap, len(values))

        def lookup(n: int) -> float:
            return values[n - 1]

    for n in range(1, cap + 1):
        if not lookup(n) > delta:
            if n == 1:
                _LOGGER.warning("Noise level %.6g reaches mu_1; no reliable dimension", delta)
                return DimensionChoice(n=0, flagged=True, note="delta >= mu_1")
            return DimensionChoice(n=n - 1)
    return DimensionChoice(n=cap, flagged=True, note="cap reached")


def lsq_error_bound(a, xn: Subspace, w) -> float:
    """Alarm threshold 2 ||(I - P_n) A^T|| ||w|| for x_dag = A^T w."""
    a = as_matrix(a, "A")
    w = as_vector(w, "w", size=a.shape[0])
    complement = a.T - xn.project(a.T)
    system = svd(complement)
    norm = float(system.sigma[0]) if system.rank else 0.0
    return LSQ_ALARM_FACTOR * norm * float(np.linalg.norm(w))

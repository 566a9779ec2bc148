"""Reduced acceptance suite behind ``illposed selftest``.

Each check raises AcceptanceError naming the failed property; the suite
covers the algebraic identities, the analytic singular system of the
integration operator and a shortened Tikhonov rate sweep.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable

import numpy as np

from ._utils_runner import fit_rate
from .bayes import map_estimate
from .config import validate_config
from .exceptions import AcceptanceError
from .linalg import svd
from .models.filter import Filter
from .models.singular_system import RandomSource
from .models.subspace import Subspace
from .nonlinear import irgn
from .problems import make_integration_operator, make_linear_forward
from .projection import dual_lsq_projection
from .runner import run_experiment
from .spectral import default_omega, filter_apply, landweber_run, tikhonov_solve

_LOGGER = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-10
SINGULAR_VALUE_COUNT = 10
ANGLE_TOLERANCE = 1e-2
RATE_WINDOW = (0.58, 0.75)


def _relative_gap(actual: np.ndarray, expected: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(expected)), np.finfo(float).tiny)
    return float(np.linalg.norm(actual - expected)) / scale


def _require(label: str, gap: float, tolerance: float = IDENTITY_TOLERANCE) -> None:
    if not gap <= tolerance:
        raise AcceptanceError(f"{label}: deviation {gap:.3e} exceeds {tolerance:.1e}")
    _LOGGER.debug("%s: deviation %.3e", label, gap)


def check_algebraic_identities() -> None:
    """SVD, Moore-Penrose, filter and estimator identities to 1e-10 relative."""
    src = RandomSource(seed=1)

    a = src.generator.standard_normal((50, 30))
    system = svd(a)
    _require("SVD reconstruction", _relative_gap(system.reconstruct(), a))
    _require("SVD left orthogonality", _relative_gap(system.u.T @ system.u, np.eye(system.rank)))
    _require("SVD right orthogonality", _relative_gap(system.v.T @ system.v, np.eye(system.rank)))

    for trial in range(20):
        rows, cols = src.generator.integers(2, 12, size=2)
        t = src.generator.standard_normal((rows, cols))
        sys_t = svd(t)
        t_dag = (sys_t.v / sys_t.sigma) @ sys_t.u.T
        _require(f"Moore-Penrose T T+ T = T (#{trial})", _relative_gap(t @ t_dag @ t, t))
        _require(f"Moore-Penrose T+ T T+ = T+ (#{trial})", _relative_gap(t_dag @ t @ t_dag, t_dag))
        _require(f"Moore-Penrose T T+ symmetric (#{trial})", _relative_gap((t @ t_dag).T, t @ t_dag))
        _require(f"Moore-Penrose T+ T symmetric (#{trial})", _relative_gap((t_dag @ t).T, t_dag @ t))

    problem = make_integration_operator(64)
    a, system = problem.a, problem.singular_system
    y = a @ np.sin(np.pi * problem.grid)
    for alpha in (1e-2, 1e-4, 1e-6):
        _require(
            f"Tikhonov normal equations alpha={alpha:g}",
            _relative_gap(tikhonov_solve(a, y, alpha), filter_apply(Filter.tikhonov(), alpha, system, y)),
        )

    omega = default_omega(float(system.sigma[0]))
    for m in (1, 10, 100):
        iterate = landweber_run(a, y, omega, max_iter=m).x
        _require(
            f"Landweber {m} steps", _relative_gap(iterate, filter_apply(Filter.landweber(omega), 1.0 / m, system, y))
        )

    for k in (4, 16):
        cutoff = float(system.sigma[k - 1] * system.sigma[k])
        dual = dual_lsq_projection(a, y, Subspace(basis=system.u[:, :k]), system=system)
        _require(f"dual LSQ vs TSVD k={k}", _relative_gap(dual, filter_apply(Filter.tsvd(), cutoff, system, y)))

    x0 = np.full(64, 0.25)
    trace = irgn(make_linear_forward(a), y, 1e-2, 1.0, x0, 1.0, 2.0, 1.0, 100)
    shifted = tikhonov_solve(a, y, float(trace.alphas[-1]), x0=x0)
    _require("IRGN on a linear problem vs shifted Tikhonov", _relative_gap(trace.x, shifted))

    delta, sigma_prior = 1e-2, 0.5
    _require(
        "MAP vs Tikhonov",
        _relative_gap(map_estimate(a, y, delta, sigma_prior), tikhonov_solve(a, y, (delta / sigma_prior) ** 2)),
    )


def check_analytic_system(n: int = 256) -> None:
    """Discrete integration matches its closed-form singular system."""
    problem = make_integration_operator(n)
    system = problem.singular_system
    expected = problem.analytic.singular_values(SINGULAR_VALUE_COUNT)
    gap = float(np.max(np.abs(system.sigma[:SINGULAR_VALUE_COUNT] - expected)))
    if gap > 2.0 / n:
        raise AcceptanceError(f"singular values deviate by {gap:.3e}, more than 2/n = {2.0 / n:.3e}")

    sampled = problem.analytic.sampled_right(1, problem.grid, problem.h)
    cosine = abs(float(system.v[:, 0] @ sampled)) / float(np.linalg.norm(sampled))
    angle = float(np.arccos(min(cosine, 1.0)))
    if angle > ANGLE_TOLERANCE:
        raise AcceptanceError(f"first right singular vector is {angle:.3e} rad from the sampled cosine")


def check_tikhonov_rate() -> None:
    """Tikhonov with the a priori choice on a nu=2 truth converges like delta^(2/3)."""
    config = validate_config(
        {
            "problem": {"name": "integration", "n": 256},
            "truth": {"nu": 2.0, "rho": 1.0, "w": "smooth"},
            "method": "tikhonov",
            "rule": "apriori",
            "delta_grid": {"start": 1e-2, "factor": 0.1, "count": 4},
            "seeds": {"realizations": 3},
        }
    )
    slope = fit_rate(run_experiment(config)).slope
    low, high = RATE_WINDOW
    if not low <= slope <= high:
        raise AcceptanceError(f"Tikhonov a priori slope {slope:.4f} outside [{low}, {high}]")
    _LOGGER.info("Tikhonov a priori slope %.4f", slope)


CHECKS: tuple[tuple[str, Callable[[], None]], ...] = (
    ("algebraic identities", check_algebraic_identities),
    ("analytic singular system", check_analytic_system),
    ("Tikhonov a priori rate", check_tikhonov_rate),
)


def run_selftest() -> float:
    """Run every check in order; returns the elapsed seconds."""
    started = time.perf_counter()
    for label, check in CHECKS:
        check_started = time.perf_counter()
        check()
        _LOGGER.info("selftest %s passed in %.2f s", label, time.perf_counter() - check_started)
    return time.perf_counter() - started

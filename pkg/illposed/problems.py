"""Built-in test problems, source-condition ground truths and noise injection."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
from scipy.linalg import toeplitz

from .const import MIN_PROBLEM_SIZE
from .exceptions import InputError, ParameterError, SizeError
from .linalg import as_matrix, as_vector, gaussian_vector
from .models.problem import AnalyticSingularSystem, GroundTruth, LinearProblem, NonlinearProblem
from .models.singular_system import RandomSource

_LOGGER = logging.getLogger(__name__)

INTEGRATION_SYSTEM = AnalyticSingularSystem(
    sigma=lambda k: 2.0 / ((2.0 * k - 1.0) * np.pi),
    left=lambda k, t: np.sqrt(2.0) * np.sin((k - 0.5) * np.pi * t),
    right=lambda k, t: np.sqrt(2.0) * np.cos((k - 0.5) * np.pi * t),
)


def midpoint_grid(n: int) -> np.ndarray:
    """Nodes t_i = (i - 1/2) / n, i = 1..n."""
    if n < MIN_PROBLEM_SIZE:
        raise SizeError(f"grid size must be at least {MIN_PROBLEM_SIZE}, got {n}")
    return (np.arange(1, n + 1) - 0.5) / n


def make_integration_operator(n: int) -> LinearProblem:
    """Discrete integration (Ax)(t) = int_0^t x(s) ds on the midpoint grid.

    The diagonal carries weight h/2 since each integral stops at its cell midpoint.
    """
    grid = midpoint_grid(n)
    h = 1.0 / n
    a = np.tril(np.full((n, n), h), k=-1) + np.diag(np.full(n, h / 2))
    return LinearProblem(name="integration", a=a, grid=grid, analytic=INTEGRATION_SYSTEM)


def make_kernel_operator(
    n: int, kernel: Callable[[np.ndarray, np.ndarray], np.ndarray], name: str = "kernel"
) -> LinearProblem:
    """Midpoint-rule discretization A_ij = h * kernel(t_j, t_i).

    ``kernel`` is called once with broadcastable node arrays (s along columns,
    t along rows) and must return finite values.
    """
    grid = midpoint_grid(n)
    h = 1.0 / n
    s, t = grid[np.newaxis, :], grid[:, np.newaxis]
    values = np.broadcast_to(np.asarray(kernel(s, t), dtype=float), (n, n))
    if not np.all(np.isfinite(values)):
        raise InputError(f"kernel {name} has non-finite values on the grid")
    return LinearProblem(name=name, a=h * np.array(values), grid=grid)


def make_gaussian_kernel_operator(n: int, width: float = 0.03) -> LinearProblem:
    """Gaussian blur with standard deviation ``width``; severely ill-posed."""
    if width <= 0:
        raise ParameterError(f"width must be positive, got {width}")
    norm = 1.0 / (width * np.sqrt(2.0 * np.pi))

    def kernel(s: np.ndarray, t: np.ndarray) -> np.ndarray:
        return norm * np.exp(-((s - t) ** 2) / (2.0 * width**2))

    return make_kernel_operator(n, kernel, name="kernel_gauss")


def analytic_mismatch(problem: LinearProblem, count: int | None = None) -> float:
    """Largest gap between analytic and computed singular values over the leading ``count`` modes."""
    if problem.analytic is None:
        raise ParameterError(f"problem {problem.name} has no analytic singular system")
    computed = problem.singular_system.sigma
    count = min(problem.n // 4, 20) if count is None else count
    count = min(count, computed.size)
    return float(np.max(np.abs(computed[:count] - problem.analytic.singular_values(count))))


def make_ground_truth(problem: LinearProblem, nu: float, w) -> GroundTruth:
    """x_dag = |A|^nu w through the numerical singular system; rho = ||w||."""
    if nu < 0:
        raise ParameterError(f"source order must be nonnegative, got {nu}")
    w = as_vector(w, "w", size=problem.a.shape[1])
    truth = GroundTruth.from_coefficients(problem.singular_system, nu, w)
    _LOGGER.debug("Ground truth for %s with nu=%s, rho=%.6g", problem.name, nu, truth.rho)
    return truth


def source_representer(problem: LinearProblem, kind: str, rho: float, src: RandomSource | None = None) -> np.ndarray:
    """Representer w with ||w|| = rho.

    ``smooth`` is the normalized constant function, ``random`` a normalized
    Gaussian draw and ``mode`` the leading right singular vector.
    """
    cols = problem.a.shape[1]
    if kind == "smooth":
        w = np.ones(cols)
    elif kind == "random":
        if src is None:
            raise ParameterError("a random representer needs a random source")
        w = gaussian_vector(src, cols)
    elif kind == "mode":
        w = problem.singular_system.v[:, 0].copy()
    else:
        raise ParameterError(f"unknown representer kind {kind!r}")
    return rho * w / np.linalg.norm(w)


def add_noise_exact(y, delta: float, src: RandomSource) -> np.ndarray:
    """Return y + delta * xi / ||xi|| for a Gaussian draw xi, so the perturbation has norm exactly delta."""
    if delta < 0:
        raise ParameterError(f"noise level must be nonnegative, got {delta}")
    y = as_vector(y, "y")
    if delta == 0:
        return y.copy()
    xi = gaussian_vector(src, y.size)
    return y + delta * xi / np.linalg.norm(xi)


def make_autoconvolution(n: int) -> NonlinearProblem:
    """Discrete autoconvolution F(x)_i = h * sum_{j<=i} x_j x_{i-j+1} on (0, 1).

    F'(x) e = 2h (x * e) truncated to n entries, a lower-triangular Toeplitz
    matrix. F is quadratic and defined everywhere; evaluation is admitted in the
    ball of radius 4 sqrt(n) around zero, which contains every function bounded by 4.
    """
    midpoint_grid(n)  # size check
    h = 1.0 / n

    def forward(x: np.ndarray) -> np.ndarray:
        return h * np.convolve(x, x)[:n]

    def derivative(x: np.ndarray) -> np.ndarray:
        return toeplitz(2.0 * h * x, np.zeros(n))

    return NonlinearProblem(
        name="autoconvolution",
        forward=forward,
        derivative=derivative,
        domain_radius=4.0 * np.sqrt(n),
        center=np.zeros(n),
    )


def make_diagonal_cubic(sigma, c: float, radius: float | None = None) -> NonlinearProblem:
    """Diagonal map F(x)_k = sigma_k (x_k + c x_k^3).

    For c < 0 the derivative degenerates at x_k^2 = 1/(3|c|), so the default
    radius is 0.9/sqrt(3|c|); otherwise it is 10.
    """
    sigma = as_vector(sigma, "sigma")
    if np.any(sigma <= 0):
        raise ParameterError("diagonal cubic needs positive sigma")
    if radius is None:
        radius = 0.9 / np.sqrt(3.0 * abs(c)) if c < 0 else 10.0

    def forward(x: np.ndarray) -> np.ndarray:
        return sigma * (x + c * x**3)

    def derivative(x: np.ndarray) -> np.ndarray:
        return np.diag(sigma * (1.0 + 3.0 * c * x**2))

    return NonlinearProblem(
        name="diagonal_cubic",
        forward=forward,
        derivative=derivative,
        domain_radius=float(radius),
        center=np.zeros(sigma.size),
    )


def make_linear_forward(a, name: str = "linear") -> NonlinearProblem:
    """Wrap a matrix as a nonlinear problem with constant derivative and unbounded domain."""
    a = as_matrix(a, "A")
    return NonlinearProblem(
        name=name,
        forward=lambda x: a @ x,
        derivative=lambda x: a,
        domain_radius=np.inf,
        center=np.zeros(a.shape[1]),
    )

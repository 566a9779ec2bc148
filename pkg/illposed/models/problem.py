"""Problem models: discrete forward operators, nonlinear maps and ground truths."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from ..exceptions import DomainError, ShapeError

if TYPE_CHECKING:
    from .singular_system import SingularSystem


@dataclass(frozen=True)
class AnalyticSingularSystem:
    """Closed-form singular system of the continuous operator on (0, 1).

    ``sigma`` maps 1-based indices to singular values; ``left``/``right`` map
    (index, nodes) to L2-normalized singular functions sampled at the nodes.
    """

    sigma: Callable[[np.ndarray], np.ndarray]
    left: Callable[[int, np.ndarray], np.ndarray]
    right: Callable[[int, np.ndarray], np.ndarray]

    def singular_values(self, count: int) -> np.ndarray:
        return self.sigma(np.arange(1, count + 1, dtype=float))

    def sampled_right(self, k: int, grid: np.ndarray, h: float) -> np.ndarray:
        """Right singular function k sampled on the grid, scaled by sqrt(h) to unit Euclidean norm."""
        return np.sqrt(h) * self.right(k, grid)

    def sampled_left(self, k: int, grid: np.ndarray, h: float) -> np.ndarray:
        return np.sqrt(h) * self.left(k, grid)


@dataclass(frozen=True, eq=False)
class LinearProblem:
    """A discretized linear forward operator on the midpoint grid of (0, 1)."""

    name: str
    a: np.ndarray
    grid: np.ndarray
    analytic: AnalyticSingularSystem | None = None

    def __post_init__(self):
        if self.a.ndim != 2:
            raise ShapeError(f"operator must be 2-D, got shape {self.a.shape}")

    @property
    def n(self) -> int:
        return int(self.grid.size)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @cached_property
    def singular_system(self) -> SingularSystem:
        """Numerical singular system, computed once per problem."""
        from ..linalg import svd

        return svd(self.a)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.a @ x


@dataclass(frozen=True, eq=False)
class NonlinearProblem:
    """A nonlinear forward map F with exact derivative F'.

    Evaluation is admitted in the closed ball of radius ``domain_radius``
    around ``center``.
    """

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    domain_radius: float
    center: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.center.size)

    def check_domain(self, x: np.ndarray) -> None:
        """Raise DomainError when ``x`` leaves the admitted ball."""
        distance = float(np.linalg.norm(x - self.center))
        if not np.isfinite(distance) or distance > self.domain_radius:
            raise DomainError(
                f"{self.name}: point at distance {distance:.6g} from the center exceeds radius {self.domain_radius:.6g}"
            )

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        self.check_domain(x)
        return self.forward(x)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        self.check_domain(x)
        return self.derivative(x)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Exact solution x_dag = |A|^nu w satisfying a source condition."""

    x_dag: np.ndarray
    nu: float
    rho: float
    w: np.ndarray

    # Factory methods
    @classmethod
    def from_coefficients(cls, system: SingularSystem, nu: float, w: np.ndarray) -> GroundTruth:
        """Create a GroundTruth by applying sigma_n^nu to the right coefficients of ``w``.

        Args:
            system: Singular system of the forward operator
            nu: Source order
            w: Source representer

        Returns:
            GroundTruth instance with rho = ||w||
        """
        coeffs = system.solution_coefficients(w)
        x_dag = system.v @ (system.sigma**nu * coeffs)
        return cls(x_dag=x_dag, nu=float(nu), rho=float(np.linalg.norm(w)), w=w)

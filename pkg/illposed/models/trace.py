"""Iteration traces and nonlinearity probes."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from ..exceptions import ShapeError


class StopReason(StrEnum):
    """Why an iteration stopped."""

    DISCREPANCY = "discrepancy"
    MAX_ITER = "max-iter"
    STAGNATION = "stagnation"
    A_PRIORI = "a-priori"


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """Per-step record of an iterative regularization method.

    ``residual_norms`` and ``error_norms`` include the starting point, so they
    hold ``n_steps + 1`` entries; ``alphas`` holds one entry per step taken.
    """

    x: np.ndarray
    n_steps: int
    stop_reason: StopReason
    residual_norms: np.ndarray
    error_norms: np.ndarray | None = None
    alphas: np.ndarray | None = None
    ratios: np.ndarray | None = None  # Linearized over nonlinear residual per LM step
    scale: float = 1.0  # Factor the forward map was divided by
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.residual_norms.size != self.n_steps + 1:
            raise ShapeError(f"{self.residual_norms.size} residuals recorded for {self.n_steps} steps")
        if self.error_norms is not None and self.error_norms.size != self.residual_norms.size:
            raise ShapeError("error and residual histories differ in length")

    @property
    def summed_squared_residuals(self) -> np.ndarray:
        """Partial sums of ||F(x_n) - y||^2 over the recorded steps."""
        return np.cumsum(self.residual_norms**2)


@dataclass(frozen=True, eq=False)
class LandweberRun:
    """Result of the linear Landweber iteration started at zero."""

    x: np.ndarray
    n_steps: int
    omega: float
    stop_reason: StopReason
    residual_norms: np.ndarray
    error_norms: np.ndarray | None = None

    @property
    def alpha(self) -> float:
        """Regularization parameter 1/N, infinite for N = 0."""
        return 1.0 / self.n_steps if self.n_steps else float("inf")


@dataclass(frozen=True, eq=False)
class DerivativeCheck:
    """Taylor remainders ||F(x+h) - F(x) - F'(x)h|| over decreasing ||h||."""

    scales: np.ndarray
    remainders: np.ndarray
    slope: float  # Log-log slope, nan when exact
    exact: bool  # All remainders vanish, as for linear maps


@dataclass(frozen=True)
class NonlinearityProbe:
    """Sampled tangential cone constant eta and Lipschitz constant of F'."""

    eta_estimate: float
    lipschitz_estimate: float
    samples: int
    skipped: int = 0

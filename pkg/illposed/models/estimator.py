"""Sequence space model and linear estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..exceptions import InputError, ParameterError, ShapeError

if TYPE_CHECKING:
    from .filter import Filter
    from .problem import GroundTruth
    from .singular_system import SingularSystem


@dataclass(frozen=True, eq=False)
class SequenceModel:
    """Diagonal observation x_n^delta = x_n + (delta/sigma_n) xi_n over finitely many modes."""

    sigma: np.ndarray
    x_coeffs: np.ndarray
    delta: float

    def __post_init__(self):
        if self.sigma.shape != self.x_coeffs.shape or self.sigma.ndim != 1:
            raise ShapeError(f"sigma {self.sigma.shape} and coefficients {self.x_coeffs.shape} differ")
        if np.any(self.sigma <= 0):
            raise InputError("sequence model needs positive singular values")
        if self.delta < 0:
            raise ParameterError(f"delta must be nonnegative, got {self.delta}")

    # Factory methods
    @classmethod
    def from_system(cls, system: SingularSystem, truth: GroundTruth, delta: float) -> SequenceModel:
        """Create a SequenceModel from a singular system and a ground truth.

        Args:
            system: Singular system of the forward operator
            truth: Ground truth whose coefficients <x_dag, v_n> are observed
            delta: Noise level

        Returns:
            SequenceModel over the retained modes
        """
        return cls(sigma=system.sigma, x_coeffs=system.solution_coefficients(truth.x_dag), delta=float(delta))

    @property
    def size(self) -> int:
        return int(self.sigma.size)


@dataclass(frozen=True, eq=False)
class LinearEstimator:
    """Linear estimator x_gamma = sum gamma_n x_n^delta v_n."""

    gamma: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.gamma)) or np.any(self.gamma < 0):
            raise InputError("estimator weights must be finite and nonnegative")

    # Factory methods
    @classmethod
    def from_filter(cls, filt: Filter, alpha: float, sigma: np.ndarray) -> LinearEstimator:
        """Weights gamma_n = phi_alpha(sigma_n^2) sigma_n^2 of a spectral filter."""
        return cls(gamma=filt.gamma(alpha, sigma))

    @classmethod
    def cutoff(cls, n_keep: int, size: int) -> LinearEstimator:
        """Truncation keeping the first ``n_keep`` modes."""
        gamma = np.zeros(size)
        gamma[: max(0, min(n_keep, size))] = 1.0
        return cls(gamma=gamma)

    def apply(self, observation: np.ndarray) -> np.ndarray:
        return self.gamma * observation


@dataclass(frozen=True, eq=False)
class PinskerSolution:
    """Pinsker weights gamma_n = max(0, 1 - kappa a_n) with a_n = sigma_n^-nu."""

    kappa: float
    gamma: np.ndarray
    n_active: int
    minimax_value: float
    residual: float  # Defining equation evaluated at kappa
    explicit_kappa: float  # Closed form over the active set, for cross-checking

    @property
    def estimator(self) -> LinearEstimator:
        return LinearEstimator(gamma=self.gamma)

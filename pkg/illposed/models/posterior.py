"""Gaussian posterior and credible set models."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, eq=False)
class GaussianPosterior:
    """Posterior N(mean, covariance) of the Gaussian linear model.

    covariance = delta^2 (T^T T + (delta/sigma_prior)^2 I)^-1 and the mean is
    the MAP estimate.
    """

    mean: np.ndarray
    covariance: np.ndarray
    delta: float
    sigma_prior: float

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    @cached_property
    def square_root(self) -> np.ndarray:
        """Symmetric square root S with S S = covariance, from the singular system of the covariance."""
        from ..linalg import svd

        system = svd(self.covariance)
        return (system.v * np.sqrt(system.sigma)) @ system.v.T

    @cached_property
    def log_det(self) -> float:
        from ..linalg import svd

        return float(np.sum(np.log(svd(self.covariance).sigma)))

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    def mahalanobis_squared(self, x: np.ndarray) -> np.ndarray:
        """(x - mean)^T C^-1 (x - mean) for one point or a stack of points (one per row)."""
        from ..linalg import solve_spd

        centered = np.atleast_2d(x) - self.mean
        solved = solve_spd(self.covariance, centered.T)
        values = np.einsum("ij,ji->i", centered, solved)
        return values if np.ndim(x) > 1 else values[0]


@dataclass(frozen=True)
class CredibleSet:
    """Highest posterior density ellipsoid {x : (x - mean)^T C^-1 (x - mean) <= radius^2}."""

    radius: float
    eta_threshold: float  # Negative log density on the boundary
    level: float  # Posterior mass 1 - alpha


@dataclass(frozen=True, eq=False)
class WeightSummary:
    """Importance sampling diagnostics of the conditional mean estimate."""

    effective_sample_size: float  # sum w / max w
    n_samples: int
    max_log_weight: float

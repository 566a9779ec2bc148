"""Spectral filter model and Tikhonov value functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..const import FILTER_LANDWEBER, FILTER_TIKHONOV, FILTER_TSVD
from ..exceptions import ParameterError


def landweber_steps(alpha: float) -> int:
    """Iteration count m with alpha = 1/m; rejects non-integer 1/alpha."""
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    m = round(1.0 / alpha)
    if m < 1 or abs(m - 1.0 / alpha) > 1e-9 * max(m, 1):
        raise ParameterError(f"Landweber needs alpha = 1/m for an integer m, got alpha={alpha}")
    return m


@dataclass(frozen=True)
class Filter:
    """A regularizing filter phi_alpha with residual function r_alpha = 1 - lambda phi_alpha.

    The three built-in families are created through the factory methods.
    """

    name: str
    qualification: float  # Largest source order with optimal rate, math.inf if unlimited
    c_phi: float = 1.0  # Bound on lambda |phi_alpha(lambda)|
    omega: float | None = None  # Landweber relaxation

    # Factory methods
    @classmethod
    def tsvd(cls) -> Filter:
        """Truncated SVD: phi = 1/lambda for lambda >= alpha, else 0."""
        return cls(name=FILTER_TSVD, qualification=math.inf)

    @classmethod
    def tikhonov(cls) -> Filter:
        """Tikhonov: phi = 1/(lambda + alpha), qualification 2."""
        return cls(name=FILTER_TIKHONOV, qualification=2.0)

    @classmethod
    def landweber(cls, omega: float) -> Filter:
        """Landweber after m = 1/alpha steps: phi = (1 - (1 - omega lambda)^m)/lambda."""
        if omega <= 0:
            raise ParameterError(f"omega must be positive, got {omega}")
        return cls(name=FILTER_LANDWEBER, qualification=math.inf, omega=float(omega))

    @classmethod
    def from_name(cls, name: str, omega: float | None = None) -> Filter:
        if name == FILTER_TSVD:
            return cls.tsvd()
        if name == FILTER_TIKHONOV:
            return cls.tikhonov()
        if name == FILTER_LANDWEBER:
            if omega is None:
                raise ParameterError("the Landweber filter needs omega")
            return cls.landweber(omega)
        raise ParameterError(f"unknown filter {name!r}")

    def _landweber_power(self, m: int, lam: np.ndarray) -> np.ndarray:
        """(1 - omega lambda)^m, through log1p where the base is positive."""
        base = self.omega * lam
        safe = base < 1.0
        out = np.empty_like(lam)
        out[safe] = np.exp(m * np.log1p(-base[safe]))
        out[~safe] = (1.0 - base[~safe]) ** m
        return out

    def phi(self, alpha: float, lam) -> np.ndarray:
        """Evaluate phi_alpha on an array of lambda >= 0."""
        lam = np.asarray(lam, dtype=float)
        if alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {alpha}")

        if self.name == FILTER_TSVD:
            positive = np.where(lam > 0, lam, 1.0)
            return np.where((lam >= alpha) & (lam > 0), 1.0 / positive, 0.0)
        if self.name == FILTER_TIKHONOV:
            return 1.0 / (lam + alpha)

        m = landweber_steps(alpha)
        flat = np.atleast_1d(lam)
        base = self.omega * flat
        decay = np.empty_like(flat)
        safe = base < 1.0
        decay[safe] = -np.expm1(m * np.log1p(-base[safe]))
        decay[~safe] = 1.0 - (1.0 - base[~safe]) ** m
        positive = np.where(flat > 0, flat, 1.0)
        values = np.where(flat > 0, decay / positive, self.omega * m)
        return values.reshape(lam.shape)

    def residual(self, alpha: float, lam) -> np.ndarray:
        """r_alpha(lambda) = 1 - lambda phi_alpha(lambda)."""
        lam = np.asarray(lam, dtype=float)
        if alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {alpha}")

        if self.name == FILTER_TSVD:
            return np.where((lam >= alpha) & (lam > 0), 0.0, 1.0)
        if self.name == FILTER_TIKHONOV:
            return alpha / (lam + alpha)
        m = landweber_steps(alpha)
        return self._landweber_power(m, np.atleast_1d(lam)).reshape(lam.shape)

    def gamma(self, alpha: float, sigma) -> np.ndarray:
        """Estimator weights gamma_n = phi_alpha(sigma_n^2) sigma_n^2."""
        lam = np.asarray(sigma, dtype=float) ** 2
        return self.phi(alpha, lam) * lam


@dataclass(frozen=True, eq=False)
class ValueFunctions:
    """Tikhonov value functions on an increasing alpha grid.

    f = 1/2 ||A x_alpha - y||^2, g = 1/2 ||x_alpha||^2 and j = f + alpha g.
    """

    alphas: np.ndarray
    f: np.ndarray
    g: np.ndarray
    j: np.ndarray

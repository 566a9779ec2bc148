"""Singular system model and seeded random source."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ShapeError


@dataclass(frozen=True, eq=False)
class SingularSystem:
    """Retained singular triples (sigma_n, u_n, v_n) of a discrete operator.

    Singular values are sorted descending and strictly positive; columns of
    ``u`` and ``v`` are the left and right singular vectors.
    """

    sigma: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.sigma.ndim != 1 or self.u.ndim != 2 or self.v.ndim != 2:
            raise ShapeError("sigma must be 1-D and both bases 2-D")
        if self.u.shape[1] != self.sigma.size or self.v.shape[1] != self.sigma.size:
            raise ShapeError(
                f"bases with {self.u.shape[1]} and {self.v.shape[1]} columns do not match rank {self.sigma.size}"
            )

    # Factory methods
    @classmethod
    def from_diagonal(cls, sigma: np.ndarray) -> SingularSystem:
        """Create the singular system of diag(sigma) with canonical bases.

        Args:
            sigma: Positive values sorted descending

        Returns:
            SingularSystem with identity bases
        """
        sigma = np.asarray(sigma, dtype=float)
        basis = np.eye(sigma.size)
        return cls(sigma=sigma, u=basis, v=basis)

    # Shape helpers
    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u.shape[0], self.v.shape[0])

    def data_coefficients(self, y: np.ndarray) -> np.ndarray:
        """Coefficients <y, u_n> of a data vector."""
        return self.u.T @ y

    def solution_coefficients(self, x: np.ndarray) -> np.ndarray:
        """Coefficients <x, v_n> of a solution vector."""
        return self.v.T @ x

    def truncate(self, k: int) -> SingularSystem:
        """Keep the first ``k`` singular triples."""
        return SingularSystem(sigma=self.sigma[:k], u=self.u[:, :k], v=self.v[:, :k])

    def reconstruct(self) -> np.ndarray:
        """Dense matrix U diag(sigma) V^T."""
        return (self.u * self.sigma) @ self.v.T


@dataclass
class RandomSource:
    """Seeded Gaussian stream backed by numpy's PCG64 bit generator.

    Normal variates come from ``Generator.standard_normal``. The same seed
    reproduces the same stream on every platform for a given NumPy version;
    NumPy does not pin distribution streams across releases. A source is
    single-owner: share seeds, not instances, between threads.
    """

    seed: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    # Factory methods
    @classmethod
    def from_master(cls, master: int, index: int) -> RandomSource:
        """Create the source for realization ``index`` of a master seed."""
        from ..linalg import mix_seed

        return cls(seed=mix_seed(master, index))

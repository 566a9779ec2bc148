"""Subspace model with orthonormal basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..const import SUBSPACE_TOLERANCE
from ..exceptions import SubspaceError


@dataclass(frozen=True, eq=False)
class Subspace:
    """Span of the orthonormal columns of ``basis``."""

    basis: np.ndarray

    def __post_init__(self):
        if self.basis.ndim != 2:
            raise SubspaceError(f"basis must be 2-D, got shape {self.basis.shape}")
        gram = self.basis.T @ self.basis
        defect = float(np.max(np.abs(gram - np.eye(self.dim)), initial=0.0))
        if defect > SUBSPACE_TOLERANCE:
            raise SubspaceError(f"basis is not orthonormal (Gram defect {defect:.3g})")

    # Factory methods
    @classmethod
    def from_vectors(cls, vectors) -> Subspace:
        """Orthonormalize columns by modified Gram-Schmidt with one reorthogonalization pass.

        Args:
            vectors: Matrix whose columns span the subspace

        Returns:
            Subspace with the same span

        Raises:
            SubspaceError: if the columns are numerically dependent
        """
        vectors = np.array(vectors, dtype=float)
        if vectors.ndim == 1:
            vectors = vectors.reshape(-1, 1)
        basis = np.empty_like(vectors)
        for k in range(vectors.shape[1]):
            q = vectors[:, k].copy()
            original = np.linalg.norm(q)
            for _ in range(2):
                for j in range(k):
                    q -= (basis[:, j] @ q) * basis[:, j]
            norm = np.linalg.norm(q)
            if original == 0 or norm <= 1e-12 * original:
                raise SubspaceError(f"column {k} is linearly dependent on the previous ones")
            basis[:, k] = q / norm
        return cls(basis=basis)

    @classmethod
    def full(cls, n: int) -> Subspace:
        return cls(basis=np.eye(n))

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[0])

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the subspace."""
        return self.basis @ (self.basis.T @ x)


@dataclass(frozen=True, eq=False)
class LsqProjection:
    """Least-squares projection solution with its boundedness proxy.

    ``boundedness_proxy`` is ||(B^+)^T c|| for B = A X_n and coefficients c;
    an unbounded sequence over n signals the projection pathology.
    """

    x: np.ndarray
    coefficients: np.ndarray
    boundedness_proxy: float

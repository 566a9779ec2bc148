"""Unit tests for the subspace model."""

import numpy as np
import pytest

from illposed.exceptions import SubspaceError
from illposed.models.subspace import Subspace

from .._fixtures import *  # noqa: F403, F401


class TestSubspace:
    """Test orthonormal bases and projections."""

    def test_from_vectors_orthonormalizes(self, random_source):
        """Verify Gram-Schmidt output has orthonormal columns and the same span."""
        vectors = random_source.generator.standard_normal((10, 4))
        space = Subspace.from_vectors(vectors)

        np.testing.assert_allclose(space.basis.T @ space.basis, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(space.project(vectors), vectors, atol=1e-12)
        assert (space.dim, space.ambient_dim) == (4, 10)

    def test_dependent_columns_raise(self):
        """Verify a repeated column is reported."""
        with pytest.raises(SubspaceError):
            Subspace.from_vectors(np.array([[1.0, 2.0], [1.0, 2.0]]))

    def test_non_orthonormal_basis_raises(self):
        """Verify direct construction checks the Gram matrix."""
        with pytest.raises(SubspaceError):
            Subspace(basis=np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_full_space_projection_is_identity(self):
        """Verify the full space projects every vector onto itself."""
        x = np.array([1.0, -2.0, 3.0])

        np.testing.assert_array_equal(Subspace.full(3).project(x), x)

"""Numerical substrate: validated arrays, one-sided Jacobi SVD, SPD solves and seeded noise."""

from __future__ import annotations

import logging

import numpy as np
from scipy import linalg as sla

from .const import JACOBI_MAX_SWEEPS, RANK_CUTOFF_FACTOR, SYMMETRY_TOLERANCE
from .exceptions import DefinitenessError, InputError, ParameterError, ShapeError
from .models.singular_system import RandomSource, SingularSystem

_LOGGER = logging.getLogger(__name__)

_MASK64 = 0xFFFFFFFFFFFFFFFF


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D float array."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def as_vector(x, name: str = "vector", size: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, optionally of a given length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    if size is not None and arr.size != size:
        raise ShapeError(f"{name} has length {arr.size}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def round_robin_pairs(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint column pairings covering every pair (p, q) once per sweep.

    Circle-method tournament: with ``n`` padded to even, ``n - 1`` rounds of
    ``n / 2`` disjoint pairs each. Pairs involving the padding slot are dropped.
    """
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        left = [players[i] for i in range(size // 2)]
        right = [players[size - 1 - i] for i in range(size // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in zip(left, right, strict=True) if p < n and q < n]
        if pairs:
            p_idx, q_idx = zip(*pairs, strict=True)
            rounds.append((np.array(p_idx), np.array(q_idx)))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _jacobi_orthogonalize(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate the columns of ``w`` until they are mutually orthogonal.

    Returns the rotated columns W V and the accumulated rotation V.
    """
    m, n = w.shape
    v = np.eye(n)
    tol = max(m, n) * np.finfo(float).eps
    rounds = round_robin_pairs(n)

    for sweep in range(JACOBI_MAX_SWEEPS):
        rotated = 0
        for p, q in rounds:
            wp, wq = w[:, p], w[:, q]
            alpha = np.einsum("ij,ij->j", wp, wp)
            beta = np.einsum("ij,ij->j", wq, wq)
            gamma = np.einsum("ij,ij->j", wp, wq)
            active = (alpha * beta > 0) & (np.abs(gamma) > tol * np.sqrt(alpha * beta))
            if not np.any(active):
                continue
            p, q = p[active], q[active]
            wp, wq = wp[:, active], wq[:, active]
            zeta = (beta[active] - alpha[active]) / (2.0 * gamma[active])
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            w[:, p], w[:, q] = c * wp - s * wq, s * wp + c * wq
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
            rotated += int(p.size)
        _LOGGER.debug("Jacobi sweep %d applied %d rotations", sweep + 1, rotated)
        if rotated == 0:
            return w, v

    _LOGGER.warning("Jacobi SVD stopped after %d sweeps without full orthogonality", JACOBI_MAX_SWEEPS)
    return w, v


def svd(a) -> SingularSystem:
    """Singular system of ``a`` by one-sided Jacobi rotations.

    Singular values at or below max(rows, cols) * eps * sigma_1 are dropped,
    so ``rank`` is the numerical rank. The zero matrix has rank 0.
    """
    a = as_matrix(a, "A")
    transposed = a.shape[0] < a.shape[1]
    work = (a.T if transposed else a).copy()

    w, v = _jacobi_orthogonalize(work)
    norms = np.linalg.norm(w, axis=0)
    order = np.argsort(-norms, kind="stable")
    norms, w, v = norms[order], w[:, order], v[:, order]

    if norms.size == 0 or norms[0] == 0.0:
        keep = 0
    else:
        cutoff = RANK_CUTOFF_FACTOR * max(a.shape) * np.finfo(float).eps * norms[0]
        keep = int(np.count_nonzero(norms > cutoff))

    sigma = norms[:keep]
    left = w[:, :keep] / sigma
    right = v[:, :keep]
    if transposed:
        left, right = right, left

    _LOGGER.debug("SVD of %dx%d matrix has numerical rank %d", a.shape[0], a.shape[1], keep)
    return SingularSystem(sigma=sigma, u=left, v=right)


def solve_spd(a, b) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A by Cholesky factorization."""
    a = as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"A must be square, got shape {a.shape}")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"right-hand side has {b.shape[0]} rows, expected {a.shape[0]}")
    if not np.all(np.isfinite(b)):
        raise InputError("right-hand side has non-finite entries")

    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > SYMMETRY_TOLERANCE * scale:
        raise DefinitenessError("matrix is not symmetric")

    try:
        factor = sla.cho_factor(a, lower=True, check_finite=False)
    except sla.LinAlgError as err:
        raise DefinitenessError(f"matrix is not positive definite: {err}") from err
    return sla.cho_solve(factor, b, check_finite=False)


def gaussian_vector(src: RandomSource, n: int) -> np.ndarray:
    """Draw ``n`` independent standard normal variates from ``src``."""
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    return src.generator.standard_normal(n)


def mix_seed(master: int, index: int) -> int:
    """Derive the seed of realization ``index`` as master XOR splitmix64(index)."""
    z = (index + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return (master & _MASK64) ^ z

"""
Dense complex linear algebra used throughout the package.

Matrices are plain :class:`numpy.ndarray` objects of complex dtype. The
vectorization convention is column-major: ``vec`` stacks the columns of a
matrix, so that ``vec(w_r @ w_t.T) == kron(w_t, w_r)``.
"""

from typing import NamedTuple

import numpy as np


class SvdResult(NamedTuple):
    """Thin singular value decomposition ``m = u @ diag(s) @ vh``."""

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray


def as_matrix(m, name="matrix"):
    """Return ``m`` as a finite 2-D complex array.

    1-D input is treated as a column vector.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def kronecker(a, b):
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def khatri_rao(a, b):
    """Column-wise Kronecker product.

    Column ``q`` of the result is ``kron(a[:, q], b[:, q])``. With ``a`` the
    transmit phases and ``b`` the receive phases this gives
    ``vec(b @ diag(c) @ a.T) == khatri_rao(a, b) @ c``.

    Parameters
    ----------
    a : ndarray, shape (m, Q)
    b : ndarray, shape (n, Q)

    Returns
    -------
    ndarray, shape (m * n, Q)
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"column counts differ: {a.shape[1]} != {b.shape[1]}")
    return (a[:, None, :] * b[None, :, :]).reshape(-1, a.shape[1])


def vec(m):
    """Stack the columns of ``m`` into a 1-D vector."""
    return np.asarray(m).reshape(-1, order="F")


def mat(v, rows, cols):
    """Inverse of :func:`vec`: reshape a length ``rows*cols`` vector."""
    v = np.asarray(v).ravel()
    if v.size != rows * cols:
        raise ValueError(
            f"cannot reshape vector of length {v.size} to {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def svd(m):
    """Thin SVD with singular values in descending order."""
    u, s, vh = np.linalg.svd(as_matrix(m), full_matrices=False)
    return SvdResult(u, s, vh)


def default_rank_tol(shape):
    return max(shape) * np.finfo(float).eps


def numerical_rank(m, rank_tol=None):
    """Number of singular values above ``rank_tol * sigma_max``."""
    m = as_matrix(m)
    if rank_tol is None:
        rank_tol = default_rank_tol(m.shape)
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def pinv(m, rank_tol=None):
    """Moore-Penrose pseudo-inverse via the SVD.

    Singular values at or below ``rank_tol * sigma_max`` are discarded.
    ``rank_tol`` defaults to ``max(rows, cols) * eps``.
    """
    m = as_matrix(m)
    if rank_tol is None:
        rank_tol = default_rank_tol(m.shape)
    if rank_tol < 0:
        raise ValueError("rank_tol must be nonnegative")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros(m.shape[::-1], dtype=complex)
    keep = s > rank_tol * s[0]
    return (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T

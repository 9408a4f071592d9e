"""Dense real linear-algebra kernels.

Matrices are plain 2-d float64 ``ndarray`` objects and index sets are
sorted 1-d integer arrays.  Least squares goes through a column-pivoted
QR factorization; normal equations are never formed here.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from gomp_lab.errors import DimensionMismatch, RankDeficient

PIVOT_RTOL = 1e-10


def as_matrix(A) -> np.ndarray:
    """Validate and return ``A`` as a finite 2-d float64 array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 0:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def as_vector(y, length=None) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 2 and 1 in y.shape:
        y = y.ravel()
    if y.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {y.shape}")
    if length is not None and y.shape[0] != length:
        raise DimensionMismatch(f"vector has length {y.shape[0]}, expected {length}")
    if not np.all(np.isfinite(y)):
        raise ValueError("vector entries must be finite")
    return y


def as_index_set(indices, n=None) -> np.ndarray:
    """Return ``indices`` as a strictly increasing ``intp`` array.

    Duplicates and out-of-range entries are rejected rather than silently
    dropped.
    """
    idx = np.asarray(indices, dtype=np.intp).ravel()
    if idx.size:
        idx = np.sort(idx)
        if np.any(np.diff(idx) == 0):
            raise ValueError(f"index set contains duplicates: {idx.tolist()}")
        if idx[0] < 0 or (n is not None and idx[-1] >= n):
            raise IndexError(f"index set {idx.tolist()} out of range for {n} columns")
    return idx


def _pivoted_qr(A, rtol):
    Q, R, piv = sla.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size and (diag[0] == 0.0 or diag[-1] <= rtol * diag[0]):
        raise RankDeficient(
            f"pivot ratio {diag[-1] / diag[0] if diag[0] else 0.0:.3e} below {rtol:g}"
        )
    return Q, R, piv


def least_squares(A, y, rtol=PIVOT_RTOL) -> np.ndarray:
    """Minimize ``||y - A z||_2`` for a tall, full-column-rank ``A``.

    Raises
    ------
    RankDeficient
        If the smallest pivot of the column-pivoted QR is below ``rtol``
        times the largest.
    """
    A = as_matrix(A)
    m, k = A.shape
    y = as_vector(y, m)
    if k > m:
        raise DimensionMismatch(f"least_squares needs rows >= cols, got {A.shape}")
    if k == 0:
        return np.zeros(0)
    Q, R, piv = _pivoted_qr(A, rtol)
    z = np.empty(k)
    z[piv] = sla.solve_triangular(R, Q.T @ y)
    return z


def project_residual(Phi, S, y) -> np.ndarray:
    """Return ``y - Phi_S z`` where ``z`` is the least-squares fit on ``S``."""
    Phi = as_matrix(Phi)
    y = as_vector(y, Phi.shape[0])
    S = as_index_set(S, Phi.shape[1])
    if S.size == 0:
        return y.copy()
    sub = Phi[:, S]
    return y - sub @ least_squares(sub, y)


def correlations(Phi, r) -> np.ndarray:
    """Absolute inner products ``|<phi_j, r>|`` for every column ``j``."""
    Phi = as_matrix(Phi)
    return np.abs(Phi.T @ as_vector(r, Phi.shape[0]))


def gram_extreme_eigs(Phi, I) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the Gram matrix of ``Phi[:, I]``."""
    Phi = as_matrix(Phi)
    I = as_index_set(I, Phi.shape[1])
    if I.size == 0:
        raise ValueError("gram_extreme_eigs needs a non-empty index set")
    if I.size > Phi.shape[0]:
        raise DimensionMismatch(f"|I| = {I.size} exceeds the {Phi.shape[0]} rows")
    sub = Phi[:, I]
    eig = np.linalg.eigvalsh(sub.T @ sub)
    return max(float(eig[0]), 0.0), max(float(eig[-1]), 0.0)


def orthogonalize_against(Phi, I1, rtol=PIVOT_RTOL) -> np.ndarray:
    """Project every column of ``Phi`` onto the orthogonal complement of
    ``span(Phi[:, I1])``."""
    Phi = as_matrix(Phi)
    I1 = as_index_set(I1, Phi.shape[1])
    if I1.size == 0:
        return Phi.copy()
    if I1.size > Phi.shape[0]:
        raise RankDeficient(f"{I1.size} columns cannot be independent in R^{Phi.shape[0]}")
    Q, _, _ = _pivoted_qr(Phi[:, I1], rtol)
    return Phi - Q @ (Q.T @ Phi)

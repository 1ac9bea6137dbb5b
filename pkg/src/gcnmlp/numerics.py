"""Dense/sparse kernels and a symmetric eigensolver.

Dense matrices are plain ``float64`` numpy arrays; sparse matrices are
``scipy.sparse.csr_array`` with sorted, unique column indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp

from .errors import CapExceededError, DimensionError, NumericalError, ValidationError

EIG_CAP = 4000
COS_EPS = 1e-12


def as_dense(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D float64 array with finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return m


def as_csr(a) -> sp.csr_array:
    s = sp.csr_array(a, dtype=np.float64)
    s.sum_duplicates()
    s.sort_indices()
    if not np.all(np.isfinite(s.data)):
        raise ValidationError("sparse matrix contains NaN or Inf")
    return s


def spmm(s, m: np.ndarray) -> np.ndarray:
    """Sparse (CSR) times dense."""
    if s.shape[1] != m.shape[0]:
        raise DimensionError(f"spmm: {s.shape} x {m.shape}")
    return np.asarray(s @ m, dtype=np.float64)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: {a.shape} x {b.shape}")
    return a @ b


def relu(m: np.ndarray) -> np.ndarray:
    return np.maximum(m, 0.0)


def relu_mask(m: np.ndarray) -> np.ndarray:
    # subgradient at exactly 0 is 0
    return (m > 0).astype(np.float64)


def row_cosines(a: np.ndarray, b: np.ndarray):
    """Per-row cosine plus the mask of rows where both norms are >= 1e-12.

    Computed as dot / sqrt(|a|^2 |b|^2) so that identical or negated rows
    give exactly +1 / -1.
    """
    ssa = np.einsum("ij,ij->i", a, a)
    ssb = np.einsum("ij,ij->i", b, b)
    dots = np.einsum("ij,ij->i", a, b)
    ok = (np.sqrt(ssa) >= COS_EPS) & (np.sqrt(ssb) >= COS_EPS)
    cos = np.zeros(a.shape[0])
    cos[ok] = np.clip(dots[ok] / np.sqrt(ssa[ok] * ssb[ok]), -1.0, 1.0)
    return cos, ok


def cosine_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-row cosine similarity; rows with norm below 1e-12 give 0."""
    if a.shape != b.shape:
        raise DimensionError(f"cosine_rows: {a.shape} vs {b.shape}")
    return row_cosines(a, b)[0]


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns
    sweeps: int = 0


@numba.njit(cache=True)
def _jacobi_sweep(a, vt):
    # one cyclic sweep; a stays exactly symmetric, vt holds eigenvectors as rows
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            sign = 1.0 if theta >= 0.0 else -1.0
            t = sign / (abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            for k in range(n):
                if k == p or k == q:
                    continue
                akp = a[p, k]
                akq = a[q, k]
                x = c * akp - s * akq
                y = s * akp + c * akq
                a[p, k] = x
                a[k, p] = x
                a[q, k] = y
                a[k, q] = y
            a[p, p] -= t * apq
            a[q, q] += t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0
            for k in range(n):
                vp = vt[p, k]
                vq = vt[q, k]
                vt[p, k] = c * vp - s * vq
                vt[q, k] = s * vp + c * vq


def _offdiag_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def sym_eig(m, cap: int = EIG_CAP, tol: float = 1e-12, max_sweeps: int = 100) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all off-diagonal pairs in row order until the off-diagonal
    Frobenius norm is at most ``tol * ||m||_F``. Eigenvalues are returned in
    ascending order with matching eigenvector columns.

    Raises:
        ValidationError: if ``m`` is not symmetric within 1e-10.
        CapExceededError: if ``m`` has more than ``cap`` rows.
    """
    a = as_dense(m).copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionError(f"sym_eig needs a square matrix, got {a.shape}")
    if n > cap:
        raise CapExceededError(n, cap)
    scale = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    if n and np.max(np.abs(a - a.T)) > 1e-10 * scale:
        raise ValidationError("sym_eig: input is not symmetric")
    a = np.ascontiguousarray(0.5 * (a + a.T))
    vt = np.eye(n)
    target = tol * np.linalg.norm(a)
    sweeps = 0
    while n > 1 and _offdiag_norm(a) > target:
        if sweeps >= max_sweeps:
            raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps")
        _jacobi_sweep(a, vt)
        sweeps += 1
    evals = np.diag(a).copy()
    order = np.argsort(evals, kind="stable")
    return EigenDecomposition(evals[order], np.ascontiguousarray(vt[order].T), sweeps)

"""Dense and compressed-sparse-row linear algebra plus activations.

Dense matrices and vectors are plain float64 numpy arrays; the CSR type is
the storage used by the sparse forward kernel.  Everything here is pure and
safe to call concurrently on shared read-only arrays.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ShapeError


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse row matrix (float64 values, int64 indices)."""

    rows: int
    cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    @property
    def nnz(self):
        return int(self.row_offsets[-1])


def matvec(a, x):
    """Dense matrix-vector product ``a @ x``."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise ShapeError(f"matvec shapes incompatible: {a.shape} x {x.shape}")
    return a @ x


def csr_from_masked(w, mask):
    """Build a CsrMatrix holding w's entries wherever ``mask`` is true."""
    w = np.asarray(w, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if w.shape != mask.shape or w.ndim != 2:
        raise ShapeError(f"weight/mask shape mismatch: {w.shape} vs {mask.shape}")
    rows, cols = w.shape
    row_ids, col_ids = np.nonzero(mask)  # row-major: columns sorted within rows
    values = np.ascontiguousarray(w[row_ids, col_ids], dtype=np.float64)
    counts = np.bincount(row_ids, minlength=rows)
    row_offsets = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_offsets[1:])
    return CsrMatrix(rows, cols, row_offsets, col_ids.astype(np.int64), values)


def densify(a):
    """Expand a CsrMatrix back to a dense array."""
    out = np.zeros((a.rows, a.cols))
    row_ids = np.repeat(np.arange(a.rows), np.diff(a.row_offsets))
    out[row_ids, a.col_indices] = a.values
    return out


def spmv(a, x):
    """Sparse matrix-vector product; equals ``matvec(densify(a), x)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or a.cols != x.shape[0]:
        raise ShapeError(f"spmv shapes incompatible: {a.rows}x{a.cols} x {x.shape}")
    return kernels.csr_matvec(a.row_offsets, a.col_indices, a.values, x, a.rows)


def sigmoid(x):
    """Elementwise logistic function, output strictly inside (0, 1)."""
    return kernels.sigmoid_stable(x)


def tanh_act(x):
    """Elementwise hyperbolic tangent; output in (-1, 1) except that hard
    saturation (|x| beyond ~19) rounds to exactly +/-1 in float64."""
    return np.tanh(np.asarray(x, dtype=np.float64))

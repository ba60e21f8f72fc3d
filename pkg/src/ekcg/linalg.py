"""Sparse SPD matrix storage and the small dense kernels every solver uses.

The matrix format is plain CSR with both triangles stored explicitly, so a
matrix-vector product never branches on symmetry.  Dense block vectors are
ordinary 2-D numpy arrays (n rows, one column per vector); small Gram-type
matrices are 2-D arrays as well.
"""

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "Breakdown",
    "SparseSpdMatrix",
    "spmv",
    "spmm",
    "gram",
    "cholesky_small",
    "trsm_right_inv",
    "norm2",
]

# Column count above which spmm processes the block in slices to bound the
# nnz-by-m scratch array.
_SPMM_SLICE = 64


class Breakdown(Exception):
    """Numerical rank deficiency detected during a Cholesky factorization.

    Raised when a pivot falls at or below breakdown_tol times the largest
    diagonal entry.  Callers decide how to recover; solvers surface it as
    status="breakdown".
    """


class SparseSpdMatrix:
    """Symmetric positive definite matrix in full (two-triangle) CSR storage.

    Construction validates structural and numerical symmetry, sorted in-range
    column indices, and a strictly positive, fully present diagonal.
    Instances are immutable after construction.
    """

    __slots__ = ("n", "row_ptr", "col_idx", "values")

    def __init__(self, n, row_ptr, col_idx, values, validate=True):
        self.n = int(n)
        self.row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        if validate:
            self._validate()

    @classmethod
    def from_coo(cls, n, rows, cols, vals):
        """Build from coordinate triplets; duplicate entries are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols, vals must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n
                          or cols.min() < 0 or cols.max() >= n):
            raise ValueError("coordinate index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            keep = np.empty(rows.size, dtype=bool)
            keep[0] = True
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            group = np.cumsum(keep) - 1
            summed = np.zeros(int(group[-1]) + 1, dtype=np.float64)
            np.add.at(summed, group, vals)
            rows, cols, vals = rows[keep], cols[keep], summed
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(row_ptr, rows + 1, 1)
        row_ptr = np.cumsum(row_ptr)
        return cls(n, row_ptr, cols, vals)

    def _validate(self):
        n, rp, ci, vv = self.n, self.row_ptr, self.col_idx, self.values
        if n < 1:
            raise ValueError("matrix dimension must be >= 1")
        if rp.shape != (n + 1,) or rp[0] != 0 or rp[-1] != ci.size:
            raise ValueError("malformed row_ptr")
        if np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if ci.size != vv.size:
            raise ValueError("col_idx and values length mismatch")
        if ci.size and (ci.min() < 0 or ci.max() >= n):
            raise ValueError("column index out of range")
        row_of = np.repeat(np.arange(n), np.diff(rp))
        # sorted within each row: column must increase unless the row changes
        if ci.size > 1:
            same_row = row_of[1:] == row_of[:-1]
            if np.any(same_row & (np.diff(ci) <= 0)):
                raise ValueError("column indices must be sorted and unique per row")
        diag = self.diagonal()
        if np.any(np.isnan(diag)) or np.any(diag <= 0.0):
            raise ValueError("diagonal entries must all be present and > 0")
        # symmetry: the transpose has identical CSR arrays
        order = np.lexsort((row_of, ci))
        if not (np.array_equal(ci[order], row_of)
                and np.array_equal(row_of[order], ci)
                and np.array_equal(vv[order], vv)):
            raise ValueError("matrix is not symmetric")
        if not np.all(np.isfinite(vv)):
            raise ValueError("matrix values must be finite")

    @property
    def nnz(self):
        return int(self.col_idx.size)

    def diagonal(self):
        """Dense vector of diagonal entries (NaN where absent)."""
        d = np.full(self.n, np.nan)
        row_of = np.repeat(np.arange(self.n), np.diff(self.row_ptr))
        on_diag = row_of == self.col_idx
        d[row_of[on_diag]] = self.values[on_diag]
        return d

    def to_dense(self):
        out = np.zeros((self.n, self.n))
        row_of = np.repeat(np.arange(self.n), np.diff(self.row_ptr))
        out[row_of, self.col_idx] = self.values
        return out

    def __repr__(self):
        return f"SparseSpdMatrix(n={self.n}, nnz={self.nnz})"


def spmv(A, x):
    """Sparse matrix-vector product y = A x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: A is {A.n}x{A.n}, x has shape {x.shape}")
    return np.add.reduceat(A.values * x[A.col_idx], A.row_ptr[:-1])


def spmm(A, X):
    """Sparse matrix times dense block, column by column: Y[:, j] = A X[:, j]."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != A.n:
        raise ValueError(f"dimension mismatch: A is {A.n}x{A.n}, X has shape {X.shape}")
    m = X.shape[1]
    out = np.empty((A.n, m))
    for lo in range(0, m, _SPMM_SLICE):
        hi = min(lo + _SPMM_SLICE, m)
        prod = A.values[:, None] * X[A.col_idx, lo:hi]
        out[:, lo:hi] = np.add.reduceat(prod, A.row_ptr[:-1], axis=0)
    return out


def gram(X, Y):
    """Small dense cross-Gram matrix X^T Y."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ValueError("gram operands must share their row count")
    return X.T @ Y


def cholesky_small(B, breakdown_tol=1e-14):
    """Upper-triangular R with B = R^T R and a strictly positive diagonal.

    Raises Breakdown when a pivot drops to breakdown_tol times the largest
    diagonal entry of B, which signals numerical rank deficiency of the
    underlying block of vectors.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("cholesky_small requires a square matrix")
    m = B.shape[0]
    scale = float(np.max(np.abs(np.diag(B)))) if m else 0.0
    R = np.zeros((m, m))
    for j in range(m):
        d = B[j, j] - R[:j, j] @ R[:j, j]
        if not np.isfinite(d) or d <= breakdown_tol * scale:
            raise Breakdown(f"pivot {d:.3e} at column {j} (scale {scale:.3e})")
        R[j, j] = np.sqrt(d)
        if j + 1 < m:
            R[j, j + 1:] = (B[j, j + 1:] - R[:j, j] @ R[:j, j + 1:]) / R[j, j]
    return R


def trsm_right_inv(X, R):
    """Apply R^{-1} from the right: returns Y with Y R = X (R upper-triangular)."""
    X = np.asarray(X, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or X.shape[-1] != R.shape[0]:
        raise ValueError("shape mismatch in triangular right solve")
    if np.any(np.diag(R) == 0.0):
        raise np.linalg.LinAlgError("singular triangular factor")
    # Y R = X  <=>  R^T Y^T = X^T
    return solve_triangular(R, X.T, trans="T", lower=False).T


def norm2(v):
    """Euclidean norm."""
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64)))

"""Dense brute-force references for desk-scale verification.

Everything here materializes matrices densely and uses plain factorizations:
no orthogonalization tricks, no recurrences.  These routines are the
independent side of every solver cross-check and are never called from the
solver path itself.
"""

import numpy as np
from scipy.linalg import orth, qr

__all__ = [
    "dense_enlarged_basis",
    "krylov_basis",
    "projection_solution",
    "span_equal",
]

_MAX_N = 500


def krylov_basis(A_dense, v, k):
    """Columns v, Av, ..., A^{k-1}v, materialized densely."""
    A_dense = np.asarray(A_dense, dtype=np.float64)
    cols = [np.asarray(v, dtype=np.float64)]
    for _ in range(k - 1):
        cols.append(A_dense @ cols[-1])
    return np.column_stack(cols)


def dense_enlarged_basis(A, r0, partition, k):
    """Columns A^i split_j(r0) for i = 0..k-1, j = 1..t, in that order.

    Desk-scale only: requires n <= 500 and k*t <= n.
    """
    if A.n > _MAX_N:
        raise ValueError(f"dense oracle limited to n <= {_MAX_N}, got n={A.n}")
    if k * partition.t > A.n:
        raise ValueError(f"k*t = {k * partition.t} exceeds n = {A.n}")
    if k < 1:
        raise ValueError("need k >= 1")
    Ad = A.to_dense()
    block = partition.split(r0)
    pieces = [block]
    for _ in range(k - 1):
        block = Ad @ block
        pieces.append(block)
    return np.hstack(pieces)


def projection_solution(A, b, x0, basis, pivot_tol=1e-12):
    """The phi-minimizer over x0 + span(basis), phi(x) = x^T A x / 2 - x^T b.

    A rank-revealing pivoted QR pre-pass drops dependent columns (relative
    pivot tolerance `pivot_tol`); the reduced normal system (B^T A B) alpha =
    B^T (b - A x0) is then solved by a dense factorization.
    """
    if A.n > _MAX_N:
        raise ValueError(f"dense oracle limited to n <= {_MAX_N}, got n={A.n}")
    B = np.asarray(basis, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != A.n:
        raise ValueError("basis must be an n-by-m block")
    _, R, piv = qr(B, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        raise ValueError("basis is empty after rank-revealing pre-pass")
    rank = int(np.sum(diag > pivot_tol * diag[0]))
    if rank == 0:
        raise ValueError("basis is empty after rank-revealing pre-pass")
    B = B[:, np.sort(piv[:rank])]
    Ad = A.to_dense()
    x0 = np.zeros(A.n) if x0 is None else np.asarray(x0, dtype=np.float64)
    rhs = B.T @ (b - Ad @ x0)
    G = B.T @ Ad @ B
    alpha = np.linalg.solve(0.5 * (G + G.T), rhs)
    return x0 + B @ alpha


def span_equal(B1, B2, tol):
    """True iff the column spans coincide up to relative residual `tol`.

    Each column of one block is projected onto an orthonormal basis of the
    other; the check passes when every relative projection residual is below
    `tol`, in both directions.  Zero columns are ignored.
    """
    return _span_contains(B2, B1, tol) and _span_contains(B1, B2, tol)


def span_contains(big, small, tol):
    """True iff every column of `small` lies in span(big) to relative residual tol."""
    return _span_contains(big, small, tol)


def _span_contains(big, small, tol):
    big = _drop_zero_columns(np.asarray(big, dtype=np.float64))
    small = _drop_zero_columns(np.asarray(small, dtype=np.float64))
    if small.shape[1] == 0:
        return True
    if big.shape[1] == 0:
        return False
    Q = orth(big / np.linalg.norm(big, axis=0))
    resid = small - Q @ (Q.T @ small)
    rel = np.linalg.norm(resid, axis=0) / np.linalg.norm(small, axis=0)
    return bool(np.all(rel <= tol))


def _drop_zero_columns(B):
    if B.ndim == 1:
        B = B[:, None]
    norms = np.linalg.norm(B, axis=0)
    return B[:, norms > 0.0]

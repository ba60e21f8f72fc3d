"""Block-Jacobi split preconditioners M = L L^T.

L is block diagonal with one lower-triangular factor per consecutive index
range, obtained from an exact Cholesky or an incomplete Cholesky with zero
fill-in (IC(0)) of the corresponding diagonal block of A.  All apply
operations act block-independently: block i of the output depends only on
block i of the input.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .linalg import Breakdown

__all__ = [
    "BlockJacobiFactor",
    "uniform_block_bounds",
    "build_block_jacobi",
    "forward_solve",
    "backward_solve",
    "apply_minv",
    "forward_solve_block",
    "backward_solve_block",
    "apply_minv_block",
    "mult_l",
    "mult_lt",
    "aligned_with",
]


@dataclass(frozen=True)
class BlockJacobiFactor:
    """Per-block lower-triangular factors L_i over consecutive index ranges."""

    n: int
    block_bounds: tuple          # ((start, end), ...) covering 0..n
    factors: tuple               # dense lower-triangular L_i per block
    kind: str                    # "chol" | "ichol0"
    notes: tuple = field(default=())

    @property
    def nblocks(self):
        return len(self.block_bounds)


def uniform_block_bounds(n, nblocks):
    """Consecutive ranges; the first n mod nblocks blocks get one extra row."""
    n, nblocks = int(n), int(nblocks)
    if nblocks < 1 or nblocks > n:
        raise ValueError(f"need 1 <= nblocks <= n, got {nblocks}, n={n}")
    base, extra = divmod(n, nblocks)
    sizes = [base + 1] * extra + [base] * (nblocks - extra)
    edges = np.cumsum([0] + sizes)
    return tuple((int(edges[i]), int(edges[i + 1])) for i in range(nblocks))


def _dense_diag_block(A, start, end):
    m = end - start
    block = np.zeros((m, m))
    for i in range(start, end):
        lo, hi = A.row_ptr[i], A.row_ptr[i + 1]
        cols = A.col_idx[lo:hi]
        keep = (cols >= start) & (cols < end)
        block[i - start, cols[keep] - start] = A.values[lo:hi][keep]
    return block


def _ichol0(block, pattern):
    """Zero fill-in incomplete Cholesky restricted to the lower pattern of the block."""
    m = block.shape[0]
    L = np.where(pattern, np.tril(block), 0.0)
    for k in range(m):
        piv = L[k, k]
        if piv <= 0.0:
            raise Breakdown(f"nonpositive IC(0) pivot {piv:.3e} at local row {k}")
        L[k, k] = np.sqrt(piv)
        if k + 1 < m:
            col = np.where(pattern[k + 1:, k], L[k + 1:, k] / L[k, k], 0.0)
            L[k + 1:, k] = col
            trail = pattern[k + 1:, k + 1:]
            L[k + 1:, k + 1:] -= np.where(trail, np.outer(col, col), 0.0)
    return L


def build_block_jacobi(A, block_bounds, kind="chol", shift_retries=3):
    """Factor the diagonal blocks of A into a BlockJacobiFactor.

    kind="chol" uses exact dense Cholesky per block; kind="ichol0" keeps the
    sparsity pattern of the lower triangle of each block.  An IC(0) pivot
    failure is retried with a diagonal shift sigma = 1e-8 * max diag, doubled
    at most `shift_retries` times, before Breakdown is raised with the block
    index.
    """
    block_bounds = tuple((int(s), int(e)) for s, e in block_bounds)
    if block_bounds[0][0] != 0 or block_bounds[-1][1] != A.n:
        raise ValueError("block bounds must cover 0..n")
    for (s0, e0), (s1, _) in zip(block_bounds, block_bounds[1:]):
        if e0 != s1 or e0 <= s0:
            raise ValueError("block bounds must be consecutive, nonempty ranges")
    if block_bounds[-1][1] <= block_bounds[-1][0]:
        raise ValueError("block bounds must be consecutive, nonempty ranges")
    if kind not in ("chol", "ichol0"):
        raise ValueError(f"unknown factor kind {kind!r}")

    factors = []
    notes = []
    for b, (start, end) in enumerate(block_bounds):
        block = _dense_diag_block(A, start, end)
        if kind == "chol":
            try:
                factors.append(np.linalg.cholesky(block))
            except np.linalg.LinAlgError as exc:
                raise Breakdown(f"Cholesky failed on block {b + 1}: {exc}") from exc
        else:
            pattern = np.tril(block != 0.0)
            sigma = 1e-8 * float(np.max(np.diag(block)))
            shift = 0.0
            for attempt in range(shift_retries + 1):
                try:
                    shifted = block + shift * np.eye(block.shape[0]) if shift else block
                    factors.append(_ichol0(shifted, pattern))
                    if shift:
                        notes.append(f"block {b + 1}: IC(0) needed diagonal shift {shift:.3e}")
                    break
                except Breakdown:
                    if attempt == shift_retries:
                        raise Breakdown(f"IC(0) failed on block {b + 1} after "
                                        f"{shift_retries} diagonal shifts")
                    shift = sigma if shift == 0.0 else 2.0 * shift
    return BlockJacobiFactor(A.n, block_bounds, tuple(factors), kind, tuple(notes))


def _per_block(F, v, op):
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != F.n:
        raise ValueError(f"expected leading dimension {F.n}, got {v.shape}")
    out = np.empty_like(v)
    for (start, end), L in zip(F.block_bounds, F.factors):
        out[start:end] = op(L, v[start:end])
    return out


def forward_solve(F, v):
    """Solve L y = v block by block (independent forward substitutions)."""
    return _per_block(F, v, lambda L, s: solve_triangular(L, s, lower=True))


def backward_solve(F, v):
    """Solve L^T y = v block by block (independent backward substitutions)."""
    return _per_block(F, v, lambda L, s: solve_triangular(L, s, trans="T", lower=True))


def apply_minv(F, v):
    """Apply M^{-1} = L^{-T} L^{-1} block by block."""
    return backward_solve(F, forward_solve(F, v))


# Block (2-D) variants share the same per-block kernels.
forward_solve_block = forward_solve
backward_solve_block = backward_solve
apply_minv_block = apply_minv


def mult_l(F, v):
    """Multiply by L block by block."""
    return _per_block(F, v, lambda L, s: L @ s)


def mult_lt(F, v):
    """Multiply by L^T block by block."""
    return _per_block(F, v, lambda L, s: L.T @ s)


def aligned_with(F, partition):
    """True when every preconditioner block lies inside a single subdomain.

    This is the condition under which splitting commutes with L^{-1}, letting
    the solver form M^{-1} [split(r)] instead of an explicit split of L^{-1} r.
    """
    owner = partition.owner()
    return all(np.all(owner[s:e] == owner[s]) for s, e in F.block_bounds)

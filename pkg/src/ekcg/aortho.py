"""Block A-orthonormalization kernels.

Two building blocks: projecting a candidate block against an existing
A-orthonormal basis (two passes of block classical Gram-Schmidt in the
A-inner product), and normalizing a block against itself with A-CholQR or
Pre-CholQR (a Euclidean CholQR pre-pass followed by A-CholQR, which tames
ill-scaled columns before the A-Gram matrix is formed).

The solver keeps the operator product cached next to every retained block;
the internal helpers below read those caches for the projections and refresh
the new block's product with a true operator application after normalization.
"""

import numpy as np

from .linalg import Breakdown, spmm, cholesky_small, trsm_right_inv

__all__ = ["a_orthogonalize_against", "a_cholqr", "pre_cholqr"]


def _sym(G):
    return 0.5 * (G + G.T)


def a_orthogonalize_against(A, W, Q, aq=None, passes=2):
    """A-orthogonalize block W against an A-orthonormal basis Q.

    Performs `passes` rounds of W <- W - Q (Q^T A W); two passes restore
    orthogonality to the order of unit roundoff.  When `aq` (= A Q) is
    supplied the projections reuse it, otherwise A W is recomputed per pass.
    An empty Q returns W unchanged.
    """
    W = np.array(W, dtype=np.float64)
    if Q is None or Q.shape[1] == 0:
        return W
    if Q.shape[0] != W.shape[0] or Q.shape[0] != A.n:
        raise ValueError("row-count mismatch between A, W and Q")
    for _ in range(passes):
        if aq is not None:
            C = aq.T @ W
        else:
            C = Q.T @ spmm(A, W)
        W -= Q @ C
    return W


def a_cholqr(A, W, breakdown_tol=1e-14):
    """A-orthonormalize W against itself: returns W' with W'^T A W' = I.

    The Cholesky factor carries a positive diagonal, so an already
    A-orthonormal block is a fixed point.  Raises Breakdown when W is
    numerically rank deficient in the A-inner product.
    """
    W = np.asarray(W, dtype=np.float64)
    G = _sym(W.T @ spmm(A, W))
    R = cholesky_small(G, breakdown_tol)
    return trsm_right_inv(W, R)


def pre_cholqr(A, W, breakdown_tol=1e-14):
    """Euclidean CholQR followed by A-CholQR.

    Columns are scaled to unit norm first (a zero column raises Breakdown),
    then the Euclidean pre-pass orthonormalizes the block, which bounds the
    conditioning of the A-Gram matrix seen by the second step; both
    factorizations may also raise Breakdown on numerical rank deficiency.
    """
    W = _scale_columns(np.asarray(W, dtype=np.float64))
    G0 = _sym(W.T @ W)
    R0 = cholesky_small(G0, breakdown_tol)
    return a_cholqr(A, trsm_right_inv(W, R0), breakdown_tol)


def _scale_columns(W):
    norms = np.linalg.norm(W, axis=0)
    if np.any(norms == 0.0):
        dead = int(np.argmin(norms))
        raise Breakdown(f"zero column {dead} entering Pre-CholQR")
    return W / norms


# Solver-internal variants.  The engine caches the operator product of every
# retained block; projections only read those caches, and after normalization
# the new block's product is recomputed with a true operator application
# rather than carried through the triangular solves (transform roundoff
# otherwise accumulates and visibly erodes A-orthonormality on
# ill-conditioned systems).

def project_out(W, blocks, passes=2):
    """CGS2 projection of W against retained (Q_i, AQ_i) pairs, in place."""
    for _ in range(passes):
        coeffs = [aq_i.T @ W for (_, aq_i) in blocks]
        for (q_i, _), C in zip(blocks, coeffs):
            W -= q_i @ C
    return W


def normalize_block(W, op, breakdown_tol=1e-14):
    """Pre-CholQR of W in the inner product induced by `op`.

    Returns (W', op(W')) with the product computed fresh after the final
    column scaling.
    """
    W = _scale_columns(W)
    R0 = cholesky_small(_sym(W.T @ W), breakdown_tol)
    W = trsm_right_inv(W, R0)
    AW = op(W)
    R = cholesky_small(_sym(W.T @ AW), breakdown_tol)
    W = trsm_right_inv(W, R)
    return W, op(W)

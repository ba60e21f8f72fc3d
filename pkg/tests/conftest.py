"""Shared oracle helpers: independently coded dense references.

Everything here is deliberately written with plain loops or one-line dense
formulas so package code paths are checked against a second, unrelated
construction.
"""

import numpy as np
import pytest

from ekcg import SparseSpdMatrix


def dense_poisson2d(nx, ny):
    """5-point Laplacian assembled entry by entry (independent of the generator)."""
    n = nx * ny
    A = np.zeros((n, n))
    for j in range(ny):
        for i in range(nx):
            p = i + nx * j
            A[p, p] = 4.0
            if i > 0:
                A[p, p - 1] = -1.0
            if i < nx - 1:
                A[p, p + 1] = -1.0
            if j > 0:
                A[p, p - nx] = -1.0
            if j < ny - 1:
                A[p, p + nx] = -1.0
    return A


def sparse_from_dense(D, drop_tol=0.0):
    """Pack a dense symmetric matrix into SparseSpdMatrix (zeros dropped)."""
    n = D.shape[0]
    rows, cols = np.nonzero(np.abs(D) > drop_tol)
    return SparseSpdMatrix.from_coo(n, rows, cols, D[rows, cols])


def random_spd(n, rng, eig_lo=1.0, eig_hi=10.0):
    """Random SPD matrix with eigenvalues uniform in [eig_lo, eig_hi]."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = eig_lo + (eig_hi - eig_lo) * rng.random(n)
    D = (Q * eigs) @ Q.T
    D = 0.5 * (D + D.T)
    return D


def dense_cg_iterations(D, b, tol=1e-8, maxiter=None):
    """Reference dense-arithmetic CG; returns the iteration count at tol."""
    n = D.shape[0]
    maxiter = maxiter or 2 * n
    x = np.zeros(n)
    r = b.copy()
    p = r.copy()
    rho0 = np.linalg.norm(r)
    rr = r @ r
    for k in range(1, maxiter + 1):
        Ap = D @ p
        alpha = rr / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * rho0:
            return k
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
    return maxiter


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

"""Finite-difference test matrix generators and the right-hand-side protocol.

The constant-coefficient generators are the textbook 5-point/7-point
Laplacians with Dirichlet boundaries.  The variable-coefficient generators
assign a conductivity per grid node and build the diffusion stencil with
harmonic face means; boundary faces reuse the node's own conductivity, so a
unit conductivity field reproduces the Poisson stencil exactly.

Grid ordering is x-fastest: node (i, j, k) has index i + nx*(j + ny*k).
"""

import numpy as np

from .linalg import SparseSpdMatrix, spmv

__all__ = [
    "gen_poisson2d",
    "gen_poisson3d",
    "gen_aniso3d",
    "gen_skyscraper",
    "make_rhs",
]


def _diffusion_matrix(shape, kappa):
    """Assemble the variable-coefficient stencil for node conductivities kappa."""
    n = int(np.prod(shape))
    idx = np.arange(n).reshape(shape[::-1])  # axes ordered (z, y, x) / (y, x)
    kappa = kappa.reshape(shape[::-1])

    diag = np.zeros(n)
    rows, cols, vals = [], [], []
    for axis in range(idx.ndim):
        lo = [slice(None)] * idx.ndim
        hi = [slice(None)] * idx.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        a, b = idx[tuple(lo)].ravel(), idx[tuple(hi)].ravel()
        ka, kb = kappa[tuple(lo)].ravel(), kappa[tuple(hi)].ravel()
        face = 2.0 * ka * kb / (ka + kb)
        rows.extend((a, b))
        cols.extend((b, a))
        vals.extend((-face, -face))
        np.add.at(diag, a, face)
        np.add.at(diag, b, face)
        # Dirichlet boundary faces at both ends of the axis
        first = [slice(None)] * idx.ndim
        last = [slice(None)] * idx.ndim
        first[axis] = 0
        last[axis] = -1
        for side in (first, last):
            bidx = idx[tuple(side)].ravel()
            np.add.at(diag, bidx, kappa[tuple(side)].ravel())

    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    return SparseSpdMatrix.from_coo(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def _check_dims(*dims):
    for d in dims:
        if int(d) < 2:
            raise ValueError(f"grid dimensions must be >= 2, got {dims}")
    return tuple(int(d) for d in dims)


def gen_poisson2d(nx, ny):
    """5-point Laplacian on an nx-by-ny grid with Dirichlet boundaries."""
    nx, ny = _check_dims(nx, ny)
    return _diffusion_matrix((nx, ny), np.ones(nx * ny))


def gen_poisson3d(nx, ny, nz):
    """7-point Laplacian on an nx-by-ny-by-nz grid with Dirichlet boundaries."""
    nx, ny, nz = _check_dims(nx, ny, nz)
    return _diffusion_matrix((nx, ny, nz), np.ones(nx * ny * nz))


def gen_aniso3d(nx, ny, nz, layer_contrast):
    """Layered-conductivity 3-D diffusion: layer kappa cycles {1, c, 1/c} in z."""
    nx, ny, nz = _check_dims(nx, ny, nz)
    c = float(layer_contrast)
    if c < 1.0:
        raise ValueError("layer_contrast must be >= 1")
    cycle = np.array([1.0, c, 1.0 / c])
    kappa = np.repeat(cycle[np.arange(nz) % 3], nx * ny)
    return _diffusion_matrix((nx, ny, nz), kappa)


def gen_skyscraper(nx, ny, nz=None, contrast=1e3):
    """Checkerboard high-contrast diffusion in 2-D or 3-D.

    The grid is tiled into cells of edge max(1, dim//4) per axis; cells with
    even parity get conductivity `contrast`, the rest 1.
    """
    c = float(contrast)
    if c < 1.0:
        raise ValueError("contrast must be >= 1")
    if nz is None:
        nx, ny = _check_dims(nx, ny)
        shape = (nx, ny)
    else:
        nx, ny, nz = _check_dims(nx, ny, nz)
        shape = (nx, ny, nz)
    cells = [np.arange(d) // max(1, d // 4) for d in shape]
    parity = np.zeros(shape[::-1], dtype=np.int64)
    for axis_from_last, cell in enumerate(reversed(cells)):
        sh = [1] * len(shape)
        sh[axis_from_last] = cell.size
        parity += cell.reshape(sh)
    kappa = np.where(parity % 2 == 0, c, 1.0).ravel()
    return _diffusion_matrix(shape, kappa)


def make_rhs(A, seed):
    """Exact solution with entries uniform in [0, 4) and the matching right-hand side.

    Uses numpy's PCG64 generator seeded with `seed`; the same seed always
    reproduces the same (b, x_star).
    """
    rng = np.random.default_rng(seed)
    x_star = 4.0 * rng.random(A.n)
    return spmv(A, x_star), x_star

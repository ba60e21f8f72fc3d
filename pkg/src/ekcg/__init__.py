"""Enlarged Krylov conjugate gradient solvers with memory-reduction policies.

Sparse SPD systems A x = b are solved over an enlarged Krylov subspace built
from a t-way domain decomposition.  The package provides the solver family
(sre-cg2, sre-cg, msdo-cg, modified-msdo-cg, plus a classical CG baseline),
truncated/restarted/flexibly-halved retention policies, split block-Jacobi
preconditioning, dense desk-scale oracles, matrix generators, and an
experiment harness with a CLI (`ekcg`).
"""

from .linalg import (
    Breakdown,
    SparseSpdMatrix,
    cholesky_small,
    gram,
    norm2,
    spmm,
    spmv,
    trsm_right_inv,
)
from .partition import Partition, contiguous_partition, read_partition, write_partition
from .aortho import a_cholqr, a_orthogonalize_against, pre_cholqr
from .blockjacobi import (
    BlockJacobiFactor,
    aligned_with,
    apply_minv,
    backward_solve,
    build_block_jacobi,
    forward_solve,
    uniform_block_bounds,
)
from .solvers import BasisStore, ConvergenceReport, SolverConfig, cg, enlarged_solve
from .generators import gen_aniso3d, gen_poisson2d, gen_poisson3d, gen_skyscraper, make_rhs
from .mmio import read_matrix_market, write_matrix_market
from .oracle import dense_enlarged_basis, krylov_basis, projection_solution, span_equal
from .harness import run_experiment

__version__ = "0.1.0"

__all__ = [
    "Breakdown",
    "SparseSpdMatrix",
    "spmv",
    "spmm",
    "gram",
    "cholesky_small",
    "trsm_right_inv",
    "norm2",
    "Partition",
    "contiguous_partition",
    "read_partition",
    "write_partition",
    "a_orthogonalize_against",
    "a_cholqr",
    "pre_cholqr",
    "BlockJacobiFactor",
    "uniform_block_bounds",
    "build_block_jacobi",
    "forward_solve",
    "backward_solve",
    "apply_minv",
    "aligned_with",
    "SolverConfig",
    "ConvergenceReport",
    "BasisStore",
    "cg",
    "enlarged_solve",
    "gen_poisson2d",
    "gen_poisson3d",
    "gen_aniso3d",
    "gen_skyscraper",
    "make_rhs",
    "read_matrix_market",
    "write_matrix_market",
    "dense_enlarged_basis",
    "krylov_basis",
    "projection_solution",
    "span_equal",
    "run_experiment",
]

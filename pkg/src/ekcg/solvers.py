"""The unified enlarged-CG engine and the classical CG baseline.

One iteration loop serves every enlarged method; they differ only in how the
next candidate block is built from the current residual and the previously
retained block:

* sre-cg2 / sre-cg: first block splits the initial residual over the
  subdomains; afterwards the candidate is the operator applied to the
  previous (already A-orthonormalized) block.  sre-cg is sre-cg2 with the
  retention window fixed to the last two blocks.
* modified-msdo-cg: every candidate splits the current residual.
* msdo-cg: candidate = split(residual) + previous_block * diag(beta), with
  beta = -(A previous_block)^T residual.

Every candidate is then A-orthogonalized against the retained basis (two-pass
block classical Gram-Schmidt), A-orthonormalized against itself (Pre-CholQR),
appended to the store, and the iterate/residual update uses
alpha = W^T r, x += W alpha, r -= (A W) alpha.

Memory-reduction policies: a truncated window of retained blocks, restarts
(fixed cycle or triggered when the relative residual-norm difference drops
below restart_tol), and a one-shot switch to half-width blocks on a halved
partition when that same difference drops below switch_tol.

Split block-Jacobi preconditioning M = L L^T comes in two modes.  The
default "modified" mode keeps the recurrences on the unpreconditioned
residual and only changes how candidates are built (L^{-T} split(L^{-1} r),
or M^{-1} A Z for the chained blocks).  The "explicit-hat" mode runs the
plain engine on the operator L^{-1} A L^{-T} and maps the solution back; it
exists to verify the modified mode and reports the same unpreconditioned
residual norms so the two histories are directly comparable.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import Breakdown, spmv, spmm, norm2
from .aortho import normalize_block, project_out
from .blockjacobi import (
    aligned_with,
    apply_minv,
    backward_solve,
    forward_solve,
    mult_l,
    mult_lt,
)

__all__ = [
    "METHODS",
    "RETENTIONS",
    "SolverConfig",
    "ConvergenceReport",
    "BasisStore",
    "cg",
    "enlarged_solve",
]

METHODS = ("cg", "sre-cg2", "sre-cg", "msdo-cg", "modified-msdo-cg")
RETENTIONS = ("full", "trunc", "restart", "restart-tol")
PRECOND_MODES = ("modified", "explicit-hat")


@dataclass
class SolverConfig:
    """Method and policy knobs for one solver run."""

    method: str = "sre-cg2"
    t: int = 1
    tol: float = 1e-8
    kmax: int | None = None          # None -> 2n completed iterations
    retention: str = "full"
    trunc: int | None = None         # window size for retention="trunc"
    restart_j: int | None = None     # cycle length for retention="restart"
    restart_tol: float | None = None  # trigger for retention="restart-tol"
    switch_tol: float | None = None  # flexible half-width switch trigger
    preconditioner: object = None    # BlockJacobiFactor or None
    precond_mode: str = "modified"
    true_residual_every: int = 50

    def validate(self, partition=None):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (0.0 < self.tol < 1.0):
            raise ValueError("tol must lie in (0, 1)")
        if self.kmax is not None and self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        if self.precond_mode not in PRECOND_MODES:
            raise ValueError(f"unknown precond_mode {self.precond_mode!r}")
        if self.method == "cg":
            return
        if self.retention not in RETENTIONS:
            raise ValueError(f"unknown retention {self.retention!r}")
        if self.retention == "trunc":
            if self.trunc is None or self.trunc < 2:
                raise ValueError("trunc retention needs trunc >= 2")
        if self.retention == "restart":
            if self.restart_j is None or self.restart_j < 2:
                raise ValueError("restart retention needs restart_j >= 2")
        if self.retention == "restart-tol":
            if self.restart_tol is None or not (0.0 < self.restart_tol < 1.0):
                raise ValueError("restart-tol retention needs restart_tol in (0, 1)")
        if self.method == "sre-cg":
            if self.retention == "trunc" and self.trunc != 2:
                raise ValueError("sre-cg is the trunc=2 special case; got trunc="
                                 f"{self.trunc}")
            if self.retention in ("restart", "restart-tol"):
                raise ValueError("sre-cg fixes the retention to a trunc=2 window")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.switch_tol is not None:
            if not (0.0 < self.switch_tol < 1.0):
                raise ValueError("switch_tol must lie in (0, 1)")
            if self.t % 2 != 0:
                raise ValueError("the half-width switch needs an even t")
        if partition is not None and partition.t != self.t:
            raise ValueError(f"config t={self.t} does not match partition t={partition.t}")

    def effective_window(self):
        """Retention window in blocks (None means keep everything)."""
        if self.method == "sre-cg":
            return 2
        return self.trunc if self.retention == "trunc" else None


@dataclass
class ConvergenceReport:
    """Outcome of one solver run."""

    status: str
    iterations: int
    residual_history: np.ndarray
    switch_iteration: int | None = None
    restart_iterations: list = field(default_factory=list)
    peak_block_vectors: int = 0
    relative_error: float | None = None
    true_residual: float | None = None
    true_residual_checks: list = field(default_factory=list)
    x: np.ndarray | None = None
    notes: list = field(default_factory=list)

    @property
    def converged(self):
        return self.status == "converged"


class BasisStore:
    """Retained A-orthonormal blocks with optional truncation window.

    Each entry pairs a block with its cached operator product.  The peak
    column count (length-n basis vectors held at once) is tracked across
    appends, clears and window trims and reported as the memory figure.
    """

    def __init__(self, window=None):
        if window is not None and window < 2:
            raise ValueError("truncation window must be >= 2")
        self.window = window
        self.blocks = []
        self.peak = 0
        self._cols = 0

    def append(self, W, AW):
        self.blocks.append((W, AW))
        self._cols += W.shape[1]
        self.peak = max(self.peak, self._cols)
        if self.window is not None:
            while len(self.blocks) > self.window:
                old, _ = self.blocks.pop(0)
                self._cols -= old.shape[1]

    def clear(self):
        self.blocks = []
        self._cols = 0

    def last(self):
        return self.blocks[-1]

    @property
    def column_count(self):
        return self._cols

    def concat(self):
        """Retained basis as one dense block (testing/diagnostics)."""
        if not self.blocks:
            return np.zeros((0, 0))
        return np.hstack([w for w, _ in self.blocks])


def _as_float_vec(v, n, name):
    v = np.zeros(n) if v is None else np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


def cg(A, b, x0=None, cfg=None, x_star=None):
    """Classical (optionally preconditioned) conjugate gradient.

    Returns (x, ConvergenceReport).  The residual history records the
    recurrence residual norms; convergence is tested against tol * rho_0.
    A nonpositive p^T A p stops the run with status "breakdown".
    """
    cfg = cfg if cfg is not None else SolverConfig(method="cg")
    if cfg.method != "cg":
        raise ValueError(f"cg() called with method {cfg.method!r}; use enlarged_solve")
    cfg.validate()
    b = _as_float_vec(b, A.n, "b")
    x = _as_float_vec(x0, A.n, "x0").copy()
    F = cfg.preconditioner
    kmax = cfg.kmax if cfg.kmax is not None else 2 * A.n

    r = b - spmv(A, x)
    rho0 = norm2(r)
    history = [rho0]
    notes = []
    status = None
    if rho0 == 0.0:
        status = "converged"
    else:
        z = apply_minv(F, r) if F is not None else r
        p = z.copy()
        rz = float(r @ z)
        k = 1
        while history[-1] > cfg.tol * rho0 and k <= kmax:
            Ap = spmv(A, p)
            pAp = float(p @ Ap)
            if pAp <= 0.0:
                status = "breakdown"
                notes.append(f"nonpositive curvature p^T A p = {pAp:.3e} at iteration {k}")
                break
            alpha = rz / pAp
            x = x + alpha * p
            r = r - alpha * Ap
            history.append(norm2(r))
            z = apply_minv(F, r) if F is not None else r
            rz_new = float(r @ z)
            beta = rz_new / rz
            rz = rz_new
            p = z + beta * p
            k += 1
        if status is None:
            status = "converged" if history[-1] <= cfg.tol * rho0 else "maxiter"

    report = ConvergenceReport(
        status=status,
        iterations=len(history) - 1,
        residual_history=np.array(history),
        peak_block_vectors=0,
        x=x,
        notes=notes,
    )
    report.true_residual = norm2(b - spmv(A, x))
    if x_star is not None:
        report.relative_error = norm2(x - x_star) / norm2(x_star)
    return x, report


def enlarged_solve(A, b, x0=None, partition=None, cfg=None, x_star=None,
                   on_iteration=None):
    """Run one enlarged-CG method per the configured policy knobs.

    Returns (x, ConvergenceReport).  With cfg.preconditioner set, the
    "modified" mode solves with modified recurrences on the unpreconditioned
    residual; "explicit-hat" runs the plain engine on L^{-1} A L^{-T} and
    maps the iterate back.  Both report unpreconditioned residual norms.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    if cfg.method == "cg":
        return cg(A, b, x0=x0, cfg=cfg, x_star=x_star)
    if partition is None:
        raise ValueError("enlarged methods need a partition")
    cfg.validate(partition)
    b = _as_float_vec(b, A.n, "b")
    x0 = _as_float_vec(x0, A.n, "x0")
    F = cfg.preconditioner
    if F is not None and F.n != A.n:
        raise ValueError("preconditioner dimension does not match the matrix")

    if F is not None and cfg.precond_mode == "explicit-hat":
        return _solve_explicit_hat(A, b, x0, partition, cfg, x_star, on_iteration)

    def op(X):
        return spmm(A, X) if X.ndim == 2 else spmv(A, X)

    x, report = _run_engine(op, A.n, b, x0, partition, cfg, F, norm2, on_iteration)
    report.true_residual = norm2(b - spmv(A, x))
    if x_star is not None:
        report.relative_error = norm2(x - x_star) / norm2(x_star)
    return x, report


def _solve_explicit_hat(A, b, x0, partition, cfg, x_star, on_iteration):
    F = cfg.preconditioner
    b_hat = forward_solve(F, b)
    x0_hat = mult_lt(F, x0)

    def op(X):
        inner = backward_solve(F, X)
        prod = spmm(A, inner) if X.ndim == 2 else spmv(A, inner)
        return forward_solve(F, prod)

    def unpreconditioned_norm(r_hat):
        return norm2(mult_l(F, r_hat))

    hat_cfg = replace(cfg, preconditioner=None)
    x_hat, report = _run_engine(op, A.n, b_hat, x0_hat, partition, hat_cfg,
                                None, unpreconditioned_norm, on_iteration)
    x = backward_solve(F, x_hat)
    report.x = x
    report.true_residual = norm2(b - spmv(A, x))
    if x_star is not None:
        report.relative_error = norm2(x - x_star) / norm2(x_star)
    return x, report


def _run_engine(op, n, b, x0, partition, cfg, F, residual_norm, on_iteration):
    """The shared iteration loop; `op` is the system operator in r's space."""
    method = cfg.method
    retention = cfg.retention if cfg.method != "sre-cg" else "trunc"
    kmax = cfg.kmax if cfg.kmax is not None else 2 * n
    notes = []

    use_minv_split = F is not None and aligned_with(F, partition)
    if F is not None and not use_minv_split:
        notes.append("preconditioner blocks not aligned with partition subdomains; "
                     "using explicit split application")

    def candidate_split(r, part):
        if F is None:
            return part.split(r)
        if use_minv_split:
            return apply_minv(F, part.split(r))
        return backward_solve(F, part.split(forward_solve(F, r)))

    def chain_next(prev_aw):
        return prev_aw.copy() if F is None else apply_minv(F, prev_aw)

    x = x0.copy()
    r = b - op(x)
    rho0 = residual_norm(r)
    history = [rho0]
    store = BasisStore(window=cfg.effective_window())
    restarts = []
    switch_iteration = None
    switched = False
    part = partition
    tol1 = 1.0
    best_rho, best_k = rho0, 0
    stagnation_window = max(20, kmax // 10) if retention == "restart" else None
    true_checks = []
    status = "converged" if rho0 == 0.0 else None

    k = 1
    while status is None and history[-1] > cfg.tol * rho0 and k <= kmax:
        if k > 1 and retention == "restart" and k % cfg.restart_j == 1:
            store.clear()
            restarts.append(k)
        elif (k > 1 and retention == "restart-tol" and tol1 < cfg.restart_tol
              and (not restarts or k > restarts[-1] + 1)):
            store.clear()
            restarts.append(k)

        if (cfg.switch_tol is not None and not switched and k > 1
                and tol1 < cfg.switch_tol):
            part = part.halve()
            switched = True
            switch_iteration = k
            W = candidate_split(r, part)
        elif not store.blocks:
            W = candidate_split(r, part)
        elif method in ("sre-cg2", "sre-cg"):
            W = chain_next(store.last()[1])
        elif method == "modified-msdo-cg":
            W = candidate_split(r, part)
        else:  # msdo-cg
            prev_w, prev_aw = store.last()
            beta_rhs = r if F is None else apply_minv(F, r)
            beta = -(prev_aw.T @ beta_rhs)
            W = candidate_split(r, part) + prev_w * beta

        try:
            if store.blocks:
                W = project_out(W, store.blocks)
            W, AW = normalize_block(W, op)
        except Breakdown as exc:
            status = "breakdown"
            notes.append(f"basis breakdown at iteration {k}: {exc}")
            break
        store.append(W, AW)

        alpha = W.T @ r
        x = x + W @ alpha
        r = r - AW @ alpha
        rho = residual_norm(r)
        tol1 = abs(rho - history[-1]) / rho0
        history.append(rho)

        if k % cfg.true_residual_every == 0:
            true_checks.append((k, residual_norm(b - op(x))))
        if on_iteration is not None:
            on_iteration({"k": k, "x": x, "r": r, "rho": rho, "tol1": tol1,
                          "store": store, "partition": part})
        if rho < best_rho:
            best_rho, best_k = rho, k
        elif stagnation_window is not None and k - best_k >= stagnation_window:
            status = "stagnated"
            notes.append(f"no residual decrease over {stagnation_window} iterations")
            break
        k += 1

    if status is None:
        status = "converged" if history[-1] <= cfg.tol * rho0 else "maxiter"

    report = ConvergenceReport(
        status=status,
        iterations=len(history) - 1,
        residual_history=np.array(history),
        switch_iteration=switch_iteration,
        restart_iterations=restarts,
        peak_block_vectors=store.peak,
        true_residual_checks=true_checks,
        x=x,
        notes=notes,
    )
    return x, report

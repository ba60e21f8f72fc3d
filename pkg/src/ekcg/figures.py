"""Convergence figures rendered on the report path, next to the TSV data."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_run_figure", "render_summary_figure"]


def render_run_figure(report, title, path):
    """Semilogy residual curve for one run, annotated with policy events."""
    history = np.asarray(report.residual_history)
    rho0 = history[0] if history[0] > 0 else 1.0
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(np.arange(history.size), history / rho0, lw=1.2, color="tab:blue")
    for k in report.restart_iterations:
        ax.axvline(k, color="tab:orange", ls=":", lw=0.8)
    if report.switch_iteration is not None:
        ax.axvline(report.switch_iteration, color="tab:red", ls="--", lw=1.0,
                   label=f"switch at {report.switch_iteration}")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"$\|r_k\|_2 / \|r_0\|_2$")
    ax.set_title(f"{title} [{report.status}]", fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_summary_figure(runs, title, path):
    """Overlay all residual curves of a batch in one figure."""
    fig, ax = plt.subplots(figsize=(7.5, 5.0))
    for run_id, report in runs:
        history = np.asarray(report.residual_history)
        rho0 = history[0] if history[0] > 0 else 1.0
        ax.semilogy(np.arange(history.size), history / rho0, lw=1.0, label=run_id)
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"$\|r_k\|_2 / \|r_0\|_2$")
    ax.set_title(title, fontsize=11)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

"""Static figures rendered next to the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_scan(table, path, potential=None, marks=(), title=None, log_r=False):
    """|T|^2 (red) and |R|^2 (blue) against energy, with the truncated potential on the left."""
    ncols = 2 if potential is not None else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.2 * ncols, 3.8), squeeze=False)
    axes = axes[0]
    if potential is not None:
        ax = axes[0]
        x = np.linspace(-potential.M - 2, potential.M + 2, 4001)
        ax.plot(x, potential(x), color="k", lw=0.8)
        ax.set_xlabel("x")
        ax.set_ylabel("V(x)")
        ax.set_title(f"truncated at M = {potential.M:g}")
    ax = axes[-1]
    ax.plot(table.E, table.absT2, color="tab:red", lw=1.0, label="|T|²")
    ax.plot(table.E, table.absR2, color="tab:blue", lw=1.0, label="|R|²")
    for m in marks:
        ax.axvline(m, color="0.5", lw=0.6, ls="--")
    if log_r:
        ax.set_yscale("log")
    ax.set_xlabel("E")
    if not log_r:
        ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_sweep(Ms, series, path, ylabel="", title=None):
    """Log-scale values against truncation half-width, one line per labelled series."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for label, ys in series.items():
        ax.semilogy(Ms, np.abs(ys), marker="o", label=label)
    ax.set_xlabel("M")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path

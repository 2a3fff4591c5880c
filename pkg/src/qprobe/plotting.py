"""Static figures for the CLI ``--plot`` option.

matplotlib is imported lazily so the numerical modules never pay for it.
PNG metadata is stripped so repeated runs write identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "font.size": 10,
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    _pyplot().close(fig)
    return path


def plot_curves(path: Path, x, curves: dict, xlabel: str, ylabel: str, title: str = "",
                logy: bool = False) -> Path:
    """One axis, one line per ``curves`` entry (label -> y)."""
    plt = _pyplot()
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, y in curves.items():
            ax.plot(x, y, lw=1.2, label=label)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend()
        return _save(fig, path)


def plot_density_snapshots(path: Path, x, times, kernel, reference) -> Path:
    """|ψ|² snapshots from both propagators: kernel solid, reference dashed."""
    plt = _pyplot()
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        colors = plt.cm.viridis(np.linspace(0, 0.9, len(times)))
        for t, a, b, c in zip(times, kernel, reference, colors):
            ax.plot(x, a, color=c, lw=1.2, label=f"t = {t:g}")
            ax.plot(x, b, color=c, lw=1.0, ls="--")
        ax.set_xlabel("x")
        ax.set_ylabel("|psi|^2")
        ax.set_title("kernel (solid) and Crank-Nicolson (dashed)")
        if len(times) <= 8:
            ax.legend(fontsize=8)
        return _save(fig, path)

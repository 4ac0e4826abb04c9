"""Report figures written straight to files (no pyplot state, no display)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib as mpl
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _figure(width=4.5, height=3.0):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot(1, 1, 1)


def spectrum_figure(rows: Sequence[tuple[int, int]], title: str, path: str | Path) -> Path:
    """Bar chart of multiplicity versus energy order n (energy n * eps)."""
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        orders = [n for n, _ in rows]
        mult = [m for _, m in rows]
        ax.bar(orders, mult, width=0.6, color="#3b6ea5")
        for n, m in rows:
            ax.annotate(str(m), (n, m), ha="center", va="bottom", fontsize=8)
        ax.set_xlabel(r"energy / $\varepsilon$")
        ax.set_ylabel("multiplicity")
        ax.set_xticks(orders)
        ax.set_title(title)
        out = Path(path)
        fig.savefig(out)
    return out


def sweep_figure(rows, path: str | Path) -> Path:
    """Log-log deviation and leakage versus total time for an adiabatic sweep."""
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        t = [r.total_time for r in rows]
        ax.loglog(t, [max(r.block_error, 1e-17) for r in rows], "o-", label="block error")
        ax.loglog(t, [max(r.phase_free_error, 1e-17) for r in rows], "s--", label="modulo global phase")
        ax.loglog(t, [max(r.leakage, 1e-17) for r in rows], "^:", label="leakage")
        ax.set_xlabel(r"$T\varepsilon$")
        ax.set_ylabel("deviation")
        ax.legend(frameon=False)
        out = Path(path)
        fig.savefig(out)
    return out


def convergence_figure(steps: Sequence[int], errors: Sequence[float], path: str | Path,
                       label: str = "holonomy error") -> Path:
    with mpl.rc_context(STYLE):
        fig, ax = _figure()
        ax.loglog(steps, [max(e, 1e-17) for e in errors], "o-", label=label)
        if len(steps) > 1 and errors[0] > 0:
            ref = [errors[0] * (steps[0] / s) ** 2 for s in steps]
            ax.loglog(steps, ref, "k:", lw=0.8, label="second order")
        ax.set_xlabel("samples")
        ax.set_ylabel("Frobenius error")
        ax.legend(frameon=False)
        out = Path(path)
        fig.savefig(out)
    return out

"""Figure rendering for sweep reports.

Sweeps write both a CSV and, by default, a PNG of the bound curve next to
it.  Rendering is headless (Agg) and deterministic; the figure marks the
regime of each grid point so the exact-bound / certified-lower-bound split
is visible at a glance.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .mur import REGIME_ABOVE

_LABELS = {
    "alpha": r"angle $\alpha$ between directions [rad]",
    "eps_product": r"threshold product $\epsilon_1 \epsilon_2$",
    "eps_ratio": r"threshold ratio $\epsilon_1 / \epsilon_2$",
    "hbar": r"$\hbar$",
    "n": "degrees of freedom n",
}


def render_sweep_figure(rows: list[dict], variable: str, out_path: str,
                        log_x: bool = False) -> str:
    """Render the bound-versus-parameter curve for one sweep.

    ``rows`` are the sweep records ({"value": grid point, "value_bits": ...,
    "regime": ..., "is_exact": ...}); returns the path written.
    """
    xs = [row["value"] for row in rows]
    ys = [row["value_bits"] for row in rows]
    above = [row["regime"] == REGIME_ABOVE for row in rows]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(xs, ys, color="#1f77b4", lw=1.5, zorder=1)
    x_above = [x for x, flag in zip(xs, above) if flag]
    y_above = [y for y, flag in zip(ys, above) if flag]
    x_below = [x for x, flag in zip(xs, above) if not flag]
    y_below = [y for y, flag in zip(ys, above) if not flag]
    if x_above:
        ax.scatter(x_above, y_above, s=14, color="#1f77b4", zorder=2,
                   label="exact (above threshold)")
    if x_below:
        ax.scatter(x_below, y_below, s=14, color="#d62728", marker="s", zorder=2,
                   label="lower bound (below threshold)")
    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel(_LABELS.get(variable, variable))
    ax.set_ylabel("incompatibility bound [bits]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path

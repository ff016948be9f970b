"""Matplotlib renderers for run reports; figures land next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_ERR_STYLES = {
    "E_v": dict(marker="o", color="tab:blue"),
    "E_u": dict(marker="s", color="tab:orange"),
    "E_u_weak": dict(marker="^", color="tab:green"),
    "d0_bound": dict(marker="d", color="tab:red"),
}


def _slope_guide(ax, hs, errs, order: float):
    h0, e0 = hs[-1], errs[-1]
    ref = [e0 * (h / h0) ** order for h in hs]
    ax.loglog(hs, ref, "k--", lw=0.8, alpha=0.6, label=f"$h^{{{order:g}}}$")


def render_ladder_figures(result, out_dir) -> list[Path]:
    """Error-ladder plot plus V/U profiles of the finest rung's snapshots."""
    out = Path(out_dir)
    written = []
    table = result.table
    hs = [r.h for r in table.rows]

    fig, ax = plt.subplots(figsize=(5.2, 3.9))
    for metric, style in _ERR_STYLES.items():
        errs = table.errors(metric)
        if all(e > 0 for e in errs):
            ax.loglog(hs, errs, label=metric.replace("_", " "), lw=1.2, ms=4, **style)
    _slope_guide(ax, hs, table.errors("E_v"), 1.0)
    ax.set_xlabel("h")
    ax.set_ylabel("error at t = T")
    ax.set_title(f"{result.config.name}: s = {result.config.s:g}, m = {result.config.m:g}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = out / "errors.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    written.append(p)

    finest = result.rungs[-1].trajectory
    xs = finest.grid.xs()
    fig, (ax_v, ax_u) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    cmap = plt.get_cmap("viridis")
    from fpme.density import differentiate

    for k, (t, snap) in enumerate(zip(finest.times, finest.snapshots)):
        color = cmap(k / max(len(finest.times) - 1, 1))
        ax_v.plot(xs, snap.values, color=color, lw=1.1, label=f"t = {t:g}")
        ax_u.plot(xs, differentiate(snap).values, color=color, lw=1.1, drawstyle="steps-pre")
    ax_v.set_xlabel("x")
    ax_v.set_ylabel("V")
    ax_u.set_xlabel("x")
    ax_u.set_ylabel("U")
    ax_v.legend(fontsize=8)
    for a in (ax_v, ax_u):
        a.grid(True, alpha=0.3)
    fig.suptitle(f"finest rung h = {finest.grid.h:g}")
    fig.tight_layout()
    p = out / "snapshots.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    written.append(p)
    return written


def render_comparison_figures(result, out_dir) -> list[Path]:
    """Density and integrated-variable overlays of the two ordered runs."""
    out = Path(out_dir)
    written = []
    traj1, traj2 = result.trajectories
    xs = traj1.grid.xs()
    from fpme.density import differentiate

    times = traj1.times
    ncols = min(len(times), 4)
    nrows = -(-len(times) // ncols)

    for which, fname in (("u", "comparison_u.png"), ("v", "comparison_v.png")):
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(3.2 * ncols, 2.6 * nrows), squeeze=False
        )
        for k, t in enumerate(times):
            ax = axes[k // ncols][k % ncols]
            s1, s2 = traj1.snapshots[k], traj2.snapshots[k]
            if which == "u":
                y1, y2 = differentiate(s1).values, differentiate(s2).values
            else:
                y1, y2 = s1.values, s2.values
            ax.plot(xs, y1, color="tab:blue", lw=1.1, label="run 1")
            ax.plot(xs, y2, color="tab:red", lw=1.1, label="run 2")
            ax.set_title(f"t = {t:g}", fontsize=9)
            ax.grid(True, alpha=0.3)
            if k == 0:
                ax.legend(fontsize=8)
        for k in range(len(times), nrows * ncols):
            axes[k // ncols][k % ncols].axis("off")
        fig.suptitle("densities cross" if which == "u" else "integrated variables stay ordered")
        fig.tight_layout()
        p = out / fname
        fig.savefig(p, dpi=150)
        plt.close(fig)
        written.append(p)
    return written


def render_weight_figure(table, out_dir) -> Path:
    """Decay of the scale-free weights against the k^{-1-2s} envelope."""
    out = Path(out_dir)
    ks = np.arange(1, min(table.K, 10**5) + 1)
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    ax.loglog(ks, table.w[: ks.size], lw=1.2, label=r"$\omega_k h^{2s}$")
    ax.loglog(ks, table.w[0] * ks ** (-1.0 - 2.0 * table.s), "k--", lw=0.8,
              label=f"$k^{{-1-2s}}$, s = {table.s:g}")
    ax.set_xlabel("k")
    ax.set_ylabel("weight")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = out / "weights.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return p

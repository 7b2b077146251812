"""Figure rendering for solve and sweep outputs.

Figures are written to files next to the delimited output; nothing is
ever shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_KIND_COLORS = {
    "nontrivial-mixed": "tab:red",
    "degenerate-flat": "tab:purple",
    "trivial-blocking": "tab:blue",
    "trivial-stay": "tab:green",
    "none-found": "gray",
}


def render_solve_figure(outcome, path) -> str:
    """Payoff curves of the reduced game with the solver's answer marked."""
    rg = outcome.reduced
    report = outcome.report
    grid = rg.interval.inflate(0.05).grid(600)
    h1 = np.asarray(rg.h1(grid))
    h2 = np.asarray(rg.h2(grid))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(grid, h1, label=f"switch to channel {rg.blocking_index}")
    ax.plot(grid, h2, label="keep current channel")
    if report.p_tilde is not None:
        mixed = report.p_tilde[0] * h1 + report.p_tilde[1] * h2
        ax.plot(grid, mixed, "--", color="gray", label="mixed payoff")
    for pt in report.indifference_points:
        ax.axvline(pt.u, color="0.85", zorder=0)
    if report.u_star is not None:
        ax.plot([report.u_star], [report.value], "o",
                color=_KIND_COLORS.get(report.kind, "black"), zorder=5,
                label=f"u_star ({report.kind})")
    ax.axvspan(rg.interval.lo, rg.interval.hi, color="0.95", zorder=-1)
    ax.set_xlabel("control u")
    ax.set_ylabel("conditional payoff")
    ax.set_title("reduced game payoffs")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)


def render_sweep_figure(outcome, path) -> str:
    """Stacked panels of z, game value, and optimal control over the sweep."""
    rows = outcome.rows
    param = np.array([r.parameter for r in rows])
    z = np.array([np.nan if r.z is None else r.z for r in rows])
    J = np.array([np.nan if r.J is None else r.J for r in rows])
    u_star = np.array([np.nan if r.u_star is None else r.u_star for r in rows])
    colors = [_KIND_COLORS.get(r.kind, "black") for r in rows]

    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    ax = axes[0]
    ax.plot(param, z, color="0.4", lw=1)
    ax.scatter(param, z, c=colors, s=12, zorder=5)
    if outcome.bounds is not None:
        lo, hi = outcome.bounds
        ax.axhspan(lo, hi, color="mistyrose", zorder=-1,
                   label="randomization region")
        ax.axhline(lo, color="tab:red", lw=0.8)
        ax.axhline(hi, color="tab:red", lw=0.8)
        ax.legend(fontsize=8)
    ax.set_ylabel("z")

    axes[1].plot(param, J, color="0.4", lw=1)
    axes[1].scatter(param, J, c=colors, s=12, zorder=5)
    axes[1].set_ylabel("J")

    axes[2].plot(param, u_star, color="0.4", lw=1)
    axes[2].scatter(param, u_star, c=colors, s=12, zorder=5)
    axes[2].set_ylabel("u_star")
    axes[2].set_xlabel(outcome.sweep.parameter)

    handles = [plt.Line2D([], [], marker="o", ls="", color=c, label=k)
               for k, c in _KIND_COLORS.items()
               if any(r.kind == k for r in rows)]
    axes[1].legend(handles=handles, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)

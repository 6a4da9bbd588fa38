"""Figure rendering for the CLI report path (matplotlib, Agg canvas only)."""

from __future__ import annotations

import math

import numpy as np

from .experiments import Direction, meridian_trace_distance

_COLORS = {Direction.PARALLEL: "tab:green", Direction.MERIDIAN: "tab:cyan"}


def _figure(width=6.4, height=4.0):
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.savefig(path, metadata={"Software": None})


def plot_sweep(records, path):
    """One panel per latitude: sampled or exact points plus the closed-form curves."""
    phis = sorted({r.phi for r in records})
    fig = _figure(3.2 * len(phis), 3.2)
    axes = fig.subplots(1, len(phis), sharey=True, squeeze=False)[0]
    for ax, phi in zip(axes, phis):
        rows = [r for r in records if r.phi == phi]
        shifts = np.array([r.shift for r in rows])
        if shifts.size:
            grid = np.linspace(shifts.min(), shifts.max(), 201)
            ax.plot(np.degrees(grid), meridian_trace_distance(phi, grid), color=_COLORS[Direction.MERIDIAN], lw=1)
            ax.plot(np.degrees(grid), np.zeros_like(grid), color=_COLORS[Direction.PARALLEL], lw=1)
        for direction in Direction:
            sel = [r for r in rows if r.direction is direction]
            if not sel:
                continue
            err = [r.std_error for r in sel] if sel[0].std_error is not None else None
            ax.errorbar(
                [math.degrees(r.shift) for r in sel],
                [r.trace_distance for r in sel],
                yerr=err, fmt="o", ms=3, color=_COLORS[direction], label=direction.value,
            )
        ax.set_title(f"latitude {math.degrees(phi):g} deg")
        ax.set_xlabel("shift (deg)")
    axes[0].set_ylabel("trace distance of Bob's marginal")
    axes[0].legend(frameon=False, fontsize="small")
    fig.tight_layout()
    _save(fig, path)


def plot_demo(report, path):
    names = list(report["states"])
    fig = _figure(9.6, 3.4)
    ax0, ax1, ax2 = fig.subplots(1, 3)
    x = np.arange(len(names))
    for offset, party in ((-0.2, "marginal_A"), (0.2, "marginal_B")):
        pops = [report["states"][n][party]["re"][0][0] for n in names]
        ax0.bar(x + offset, pops, width=0.4, label=party[-1])
    ax0.axhline(report["expected_marginal_diag"][0], color="k", lw=0.8, ls="--")
    ax0.set_xticks(x, names)
    ax0.set_ylabel("<0|marginal|0>")
    ax0.legend(frameon=False, fontsize="small")
    for ax, name in ((ax1, "rho1"), (ax2, "rho2")):
        m = np.array(report["bipartite"][name]["re"]) + 1j * np.array(report["bipartite"][name]["im"])
        im = ax.imshow(np.abs(m), vmin=0, vmax=1, cmap="viridis")
        ax.set_xticks(range(4), ["00", "01", "10", "11"])
        ax.set_yticks(range(4), ["00", "01", "10", "11"])
        ax.set_title(f"|masked {name}|")
    fig.colorbar(im, ax=[ax1, ax2], shrink=0.8)
    _save(fig, path)


def plot_channel(curve, path):
    fig = _figure()
    ax = fig.subplots()
    ts = [c["t"] for c in curve]
    ax.plot(ts, [c["recovered_fidelity"] for c in curve], label="masked")
    ax.plot(ts, [c["unprotected_fidelity"] for c in curve], label="bare")
    ax.set_xlabel("t")
    ax.set_ylabel("fidelity")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def plot_images(original, reconstructed, path):
    panels = [("reconstructed", reconstructed)]
    if original is not None:
        panels.insert(0, ("original", original))
    fig = _figure(3.2 * len(panels), 3.4)
    axes = fig.subplots(1, len(panels), squeeze=False)[0]
    for ax, (title, img) in zip(axes, panels):
        ax.imshow(img, interpolation="nearest")
        ax.set_title(title)
        ax.set_axis_off()
    _save(fig, path)

"""Figures for the command line reports, drawn with the Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def plot_regions(ctx, part, path, strong_rects=None):
    """Omega as rectangles, with the strong part hatched when given."""
    from .domain import omega_rectangles

    fig, ax = plt.subplots(figsize=(6, 5))
    for a, b, c, d in omega_rectangles(ctx, part):
        ax.add_patch(Rectangle((a, c), b - a, d - c, facecolor="#9ecae1", edgecolor="#3182bd", lw=0.8))
    for a, b, c, d in strong_rects or omega_rectangles(ctx, part, strong=True):
        ax.add_patch(Rectangle((a, c), b - a, d - c, fill=False, hatch="//", edgecolor="#de2d26", lw=0.5))
    for p in part.phi:
        ax.axvline(p, color="0.6", lw=0.5)
        ax.axvline(-p, color="0.6", lw=0.5)
    ax.set_xlim(-ctx.half * 1.05, ctx.half * 1.05)
    ax.set_ylim(-ctx.R * 1.05, ctx.R * 1.05)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_title(f"natural extension domain, q = {ctx.q}")
    return _save(fig, path)


def plot_density(d, path, hist=None, normalize=True):
    """Piecewise density, optionally against a Birkhoff histogram."""
    fig, ax = plt.subplots(figsize=(6, 4))
    scale = 1.0 / d.total_mass if normalize else 1.0
    for p in d.pieces:
        us = np.linspace(p.a, p.b, 100)
        ax.plot(us, [p.density(u) * scale for u in us], color="k", lw=1.2)
    if hist is not None and hist.iterations:
        widths = np.diff(hist.edges)
        emp = hist.counts / hist.iterations / widths
        if not normalize:
            emp = emp * d.total_mass
        ax.stairs(emp, hist.edges, color="#e6550d", label=f"orbit, L1 = {hist.l1:.4f}")
        ax.legend()
    ax.set_xlabel("u")
    ax.set_ylabel("density")
    return _save(fig, path)


def plot_returns(records, path):
    """Return times and cumulative time along a simulated orbit."""
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    steps = np.arange(1, len(records) + 1)
    a1.plot(steps, [r.time for r in records], "o-", ms=3)
    a1.set_ylabel("return time")
    a2.plot(steps, [r.cumulative_time for r in records], "-", color="k")
    a2.set_ylabel("cumulative")
    a2.set_xlabel("return")
    return _save(fig, path)

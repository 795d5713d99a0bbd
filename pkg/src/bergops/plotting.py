"""Figure rendering for the CLI report paths (headless matplotlib)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import DyadicBox  # noqa: E402

DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_decomposition(boxes, path, title="Dyadic decomposition"):
    """Polar patch plot of a box family."""
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(6, 6))
    for b in boxes:
        t = np.linspace(b.theta_in, b.theta_out, 16)
        ax.plot(t, np.full_like(t, b.r_in), color="tab:blue", lw=0.6)
        ax.plot(t, np.full_like(t, b.r_out), color="tab:blue", lw=0.6)
        for theta in (b.theta_in, b.theta_out):
            ax.plot([theta, theta], [b.r_in, b.r_out], color="tab:blue", lw=0.6)
    ax.set_rmax(1.0)
    ax.set_title(title)
    return _save(fig, path)


def plot_loglog(series, path, title="", xlabel="delta", ylabel="value"):
    """Log-log scatter with optional fitted lines.

    ``series`` is a list of (label, x, y, fit) where fit is None or
    (slope, intercept) in log-log coordinates.
    """
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, x, y, fit in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ax.loglog(x, y, "o", ms=4, label=label)
        if fit is not None:
            slope, intercept = fit[0], fit[1]
            xx = np.array([x.min(), x.max()])
            ax.loglog(xx, np.exp(intercept) * xx ** slope, "--", lw=1,
                      label=f"{label} fit: slope {slope:+.3f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def plot_sequence(seq, path, title=None):
    """|gamma_n| against n for a spectral sequence."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mags = np.abs(seq.gamma)
    pos = mags > 0
    ax.loglog(seq.n_values[pos], mags[pos], "o-", ms=3, lw=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel("|gamma_n|")
    ax.set_title(title or f"Diagonal sequence of {seq.symbol}")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def plot_convergence(log, path, title="Truncation ladder convergence"):
    """Grid-L2 increments against 1 - rho for a radial-limit ladder."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    rhos = np.array([r for r, _ in log], dtype=float)
    diffs = np.array([d for _, d in log], dtype=float)
    pos = diffs > 0
    ax.semilogy(1.0 - rhos[pos], diffs[pos], "o-", ms=4)
    if not math.isclose(diffs.max(initial=0.0), 0.0):
        ax.invert_xaxis()
    ax.set_xlabel("1 - rho")
    ax.set_ylabel("grid-L2 increment")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def plot_field(sample, path, title="Operator field sample"):
    """Magnitude of a sampled field over the grid points."""
    fig, ax = plt.subplots(figsize=(6, 5))
    z = sample.grid
    mags = np.abs(sample.values)
    sc = ax.scatter(z.real, z.imag, c=mags, cmap="viridis", s=60)
    fig.colorbar(sc, ax=ax, label="|value|")
    circle = plt.Circle((0, 0), 1.0, fill=False, color="grey", lw=0.8)
    ax.add_patch(circle)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title)
    return _save(fig, path)

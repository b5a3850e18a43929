"""Matplotlib renderings of estimator output, written to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import AngleSpectrum

__all__ = ["save_heatmap", "save_stem", "save_bench_chart"]


def _edges(centers: np.ndarray) -> np.ndarray:
    if len(centers) == 1:
        return np.array([centers[0] - 0.5, centers[0] + 0.5])
    mids = 0.5 * (centers[:-1] + centers[1:])
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def save_heatmap(spectrum: AngleSpectrum, path, title: str | None = None):
    """Magnitude of the angle grid as a DOD x DOA heatmap."""
    mags = np.abs(spectrum.entries)
    edges = _edges(spectrum.grid.degrees)
    fig, ax = plt.subplots(figsize=(5.4, 4.6), constrained_layout=True)
    mesh = ax.pcolormesh(edges, edges, mags, cmap="viridis", shading="flat")
    ax.set_xlabel("DOD (deg)")
    ax.set_ylabel("DOA (deg)")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="|X|")
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_stem(spectrum: AngleSpectrum, threshold: float, path, title: str | None = None):
    """Magnitude of the vectorized grid with the detection threshold marked."""
    mags = np.abs(spectrum.vec())
    idx = np.arange(mags.size)
    above = mags > threshold
    fig, ax = plt.subplots(figsize=(7.0, 3.2), constrained_layout=True)
    ax.vlines(idx, 0.0, mags, color="tab:blue", linewidth=0.6)
    if above.any():
        ax.plot(idx[above], mags[above], "x", color="tab:red", markersize=5,
                label=f"> {threshold:g}")
        ax.legend(loc="upper right")
    ax.axhline(threshold, color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("vector index")
    ax.set_ylabel("|x|")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_chart(aggregates, path, title: str | None = None):
    """Mean error and iteration count per method, with spread bars."""
    names = [a.method for a in aggregates]
    pos = np.arange(len(names))
    fig, (ax_err, ax_it) = plt.subplots(1, 2, figsize=(7.6, 3.4), constrained_layout=True)
    ax_err.bar(pos, [a.mean_error for a in aggregates],
               yerr=[a.std_error for a in aggregates], color="tab:blue", capsize=3)
    ax_err.set_xticks(pos, names, rotation=15)
    ax_err.set_ylabel("mean squared error")
    ax_it.bar(pos, [a.mean_iterations for a in aggregates],
              yerr=[a.std_iterations for a in aggregates], color="tab:orange", capsize=3)
    ax_it.set_xticks(pos, names, rotation=15)
    ax_it.set_ylabel("mean iterations")
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=150)
    plt.close(fig)

"""Figure rendering for CLI reports.

Each renderer takes the rows already written to the delimited output and
saves a PNG next to it.  Figures are a side channel: the CSV/JSON files
stay byte-deterministic and carry all the data.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FIGSIZE = (5.4, 5.4 * GOLDEN)


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.set_title(title, fontsize=10)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    return fig, ax


def _save(fig, path: str):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_decay_plot(path: str, ns, mags, title: str):
    fig, ax = _new_axes(title, "n", "|P_n|")
    ns = np.asarray(ns, dtype=float)
    mags = np.asarray(mags, dtype=float)
    pos = mags > 0
    ax.loglog(ns[pos], mags[pos], marker=".", lw=0.8, ms=3)
    _save(fig, path)


def save_reiter_plot(path: str, support_sizes, epsilons, title: str):
    fig, ax = _new_axes(title, "support size N", "epsilon(N)")
    ax.semilogy(support_sizes, epsilons, marker="o", lw=1.0, ms=4)
    _save(fig, path)


def save_gram_plot(path: str, deviations: np.ndarray, title: str):
    fig, ax = _new_axes(title, "m", "n")
    im = ax.imshow(np.log10(np.abs(deviations) + 1e-18), origin="lower",
                   cmap="viridis")
    fig.colorbar(im, ax=ax, label="log10 |deviation|")
    _save(fig, path)


def save_haar_plot(path: str, ns, haar, title: str):
    fig, ax = _new_axes(title, "n", "h(n)")
    ax.semilogy(ns, haar, marker=".", lw=0.8, ms=3)
    _save(fig, path)

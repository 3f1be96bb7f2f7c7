"""Figure rendering for the CLI report paths (Agg backend, file output only)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_density_overlay(curves, path, xlabel: str = "income (working units)") -> None:
    """Overlay fitted densities: curves is a list of (label, xs, pdfs)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, xs, ps in curves:
        ax.plot(xs, ps, lw=1.4, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)


def save_density_panels(xs, pdfs, cdfs, path, label: str, xlabel: str = "income (working units)") -> None:
    """Stacked pdf/cdf panels for a single distribution."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax1.plot(xs, pdfs, lw=1.4, color="tab:blue")
    ax1.set_ylabel("density")
    ax1.set_title(label)
    ax2.plot(xs, cdfs, lw=1.4, color="tab:orange")
    ax2.set_ylabel("CDF")
    ax2.set_xlabel(xlabel)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)

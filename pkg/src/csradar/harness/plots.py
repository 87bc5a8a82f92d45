"""Self-contained SVG figures (matplotlib, Agg backend, reproducible output)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "csradar", "svg.fonttype": "none", "font.size": 9}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def plot_demo(
    omega: Sequence[int],
    received: np.ndarray,
    channel: np.ndarray,
    nbi: np.ndarray | None,
    path: str | Path,
) -> Path:
    """Three panels: sub-sampled record, channel taps, interference bins."""
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(3, 1, figsize=(6.4, 7.2))
        axes[0].plot(omega, received.real, ".-", lw=0.8, label="real")
        axes[0].plot(omega, received.imag, ".-", lw=0.8, label="imag")
        axes[0].set_title("(a) received sub-sampled baseband signal")
        axes[0].set_xlabel("sample index")
        axes[0].legend(loc="upper right")
        axes[1].stem(np.arange(channel.shape[0]), np.abs(channel))
        axes[1].set_title("(b) recovered channel")
        axes[1].set_xlabel("tap")
        spectrum = np.zeros(channel.shape[0]) if nbi is None else np.abs(nbi)
        axes[2].stem(np.arange(spectrum.shape[0]), spectrum)
        axes[2].set_title("(c) recovered interference")
        axes[2].set_xlabel("frequency bin")
        for ax in axes:
            ax.set_ylabel("magnitude")
            ax.grid(alpha=0.3)
        fig.tight_layout()
        return _save(fig, path)


def plot_pd(
    grid: Sequence[float],
    curves: dict[str, Sequence[float]],
    xlabel: str,
    path: str | Path,
    title: str = "",
) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for label, pd in curves.items():
            ax.plot(grid, pd, "o-", label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("probability of detection")
        ax.set_ylim(-0.02, 1.02)
        ax.grid(alpha=0.3)
        ax.legend(loc="lower right")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)

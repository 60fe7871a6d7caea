"""Figure rendering for the report paths (headless, written next to the data files)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# keep PNG bytes stable across re-runs
_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


def curve_figure(
    path: str | Path,
    grid: np.ndarray,
    mean: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    point: np.ndarray | None = None,
    true: np.ndarray | None = None,
    alpha: float = 0.05,
) -> None:
    """Estimated link with its pointwise bootstrap band."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    pct = 100 * (1 - alpha)
    ax.fill_between(grid, lo, hi, color="tab:blue", alpha=0.25,
                    label=f"{pct:g}% bootstrap band")
    ax.plot(grid, mean, color="tab:blue", lw=1.8, label="bootstrap mean")
    if point is not None:
        ax.plot(grid, point, color="tab:orange", lw=1.2, ls="--", label="point fit")
    if true is not None:
        ax.plot(grid, true, color="black", lw=1.2, ls=":", label="true link")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.axvline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("exposure index")
    ax.set_ylabel("link value g(index)")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def forest_figure(
    path: str | Path,
    names: list[str],
    estimate: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    alpha: float = 0.05,
) -> None:
    """Coefficients with interval whiskers, top-to-bottom in table order."""
    k = len(names)
    ypos = np.arange(k)[::-1]
    fig, ax = plt.subplots(figsize=(6.4, 0.38 * k + 1.6))
    ax.errorbar(
        estimate, ypos,
        xerr=np.vstack([estimate - lo, hi - estimate]),
        fmt="o", color="tab:blue", ecolor="tab:blue", capsize=3, ms=4,
    )
    ax.axvline(0.0, color="gray", lw=0.8, ls="--")
    ax.set_yticks(ypos)
    ax.set_yticklabels(names, fontsize=9)
    ax.set_xlabel(f"estimate with {100 * (1 - alpha):g}% interval")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)

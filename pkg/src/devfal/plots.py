"""Figure rendering for reports, grid scans, and single rollouts.

All figures go straight to files through the Agg backend, so rendering works
on headless machines.  savefig is called with an empty Software tag; the
default tag embeds the matplotlib version and would make otherwise identical
runs produce different PNG bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .falsifier import FalsificationReport  # noqa: E402
from .gridscan import GridScan  # noqa: E402
from .stl import Signal  # noqa: E402

__all__ = ["plot_samples", "plot_grid", "plot_trajectory"]

_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def plot_samples(report: FalsificationReport, path: Path | str) -> bool:
    """Scatter the sampled deviations, violations in red, nominal starred.

    Only 2-dim deviation domains have an obvious picture; other
    dimensionalities are skipped and the function returns False.
    """
    domain = report.domain
    if domain.dimension != 2:
        return False
    points = np.array([s.deviation for s in report.samples])
    violating = np.array([s.is_violation for s in report.samples])

    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    ax.scatter(
        points[~violating, 0],
        points[~violating, 1],
        s=18,
        c="#2b6cb0",
        alpha=0.65,
        label=f"satisfied ({int((~violating).sum())})",
    )
    if violating.any():
        ax.scatter(
            points[violating, 0],
            points[violating, 1],
            s=22,
            c="#c53030",
            alpha=0.8,
            label=f"violated ({int(violating.sum())})",
        )
    ax.scatter(
        [domain.nominal[0]],
        [domain.nominal[1]],
        marker="*",
        s=160,
        c="black",
        zorder=5,
        label="nominal",
    )
    if report.best is not None:
        ax.scatter(
            [report.best.deviation[0]],
            [report.best.deviation[1]],
            marker="o",
            s=140,
            facecolors="none",
            edgecolors="black",
            linewidths=1.4,
            zorder=5,
            label="best",
        )
    ax.set_xlim(domain.lower[0], domain.upper[0])
    ax.set_ylim(domain.lower[1], domain.upper[1])
    ax.set_xlabel(domain.names[0])
    ax.set_ylabel(domain.names[1])
    ax.set_title(
        f"{report.plant_id} / {report.optimizer} / seed {report.seed} "
        f"({report.mode})"
    )
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return True


def plot_grid(result: GridScan, path: Path | str) -> None:
    """Heatmap of the worst-case robustness over the deviation grid.

    Diverging palette centred on zero: red cells violate the specification,
    blue cells keep a positive margin.  Blow-up cells sit at the red extreme
    through their sentinel gamma.
    """
    domain = result.domain
    gamma = result.gamma_matrix()
    # gamma[i, j] holds (dim-0 value i, dim-1 value j); imshow draws rows as
    # y, so transpose to put dim 0 on the x axis.
    span = float(np.max(np.abs(gamma))) or 1.0
    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    image = ax.imshow(
        gamma.T,
        origin="lower",
        cmap="RdBu",
        vmin=-span,
        vmax=span,
        extent=(domain.lower[0], domain.upper[0], domain.lower[1], domain.upper[1]),
        aspect="auto",
    )
    fig.colorbar(image, ax=ax, label="worst-case robustness")
    ax.set_xlabel(domain.names[0])
    ax.set_ylabel(domain.names[1])
    ax.set_title(f"{result.plant_id}, {result.resolution}x{result.resolution} grid")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_trajectory(signal: Signal, path: Path | str, title: str = "") -> None:
    """All observable channels of one rollout against time."""
    times = np.arange(signal.samples.shape[0]) * signal.dt
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    for k, name in enumerate(signal.channels):
        ax.plot(times, signal.samples[:, k], label=name, linewidth=1.2)
    ax.set_xlabel("time [s]")
    ax.axhline(0.0, color="gray", linewidth=0.6, linestyle=":")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)

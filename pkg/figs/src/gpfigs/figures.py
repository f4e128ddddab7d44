"""Figure builders over trajectory CSV artifacts.

Both renderers validate every input fully before the output file is
touched, so a failed render leaves no partial image behind. Styling is
fixed so re-rendering the same inputs reproduces the image byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from gpcons.artifacts import read_trajectory_csv  # noqa: E402
from gpcons.sim import TrajectoryLog  # noqa: E402


class FigureError(ValueError):
    """Raised when artifacts are missing, empty, or inconsistent."""


MODE_LABELS = {
    "none": "no learning",
    "individual": "individual GP",
    "distributed": "distributed GP",
}

MODE_COLORS = {
    "none": "tab:red",
    "individual": "tab:orange",
    "distributed": "tab:blue",
}

AGENT_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:purple",
                "tab:brown", "tab:pink", "tab:gray", "tab:olive")


@dataclass(frozen=True)
class FigureSpec:
    """One render request: input CSVs keyed by mode, output path, kind."""

    inputs: dict[str, Path]
    output: Path
    kind: str  # "accumulated_error" or "trajectory3d"
    dpi: int = 120
    title: str | None = None
    leader_style: dict = field(default_factory=lambda: {
        "color": "black", "linestyle": "--", "linewidth": 2.0})

    def __post_init__(self):
        if self.kind not in ("accumulated_error", "trajectory3d"):
            raise FigureError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise FigureError("no input CSVs given")


def _load(spec: FigureSpec) -> dict[str, TrajectoryLog]:
    logs = {}
    for mode, path in spec.inputs.items():
        path = Path(path)
        if not path.is_file():
            raise FigureError(f"missing input CSV: {path}")
        try:
            logs[mode] = read_trajectory_csv(path, mode=mode)
        except (ValueError, StopIteration) as exc:
            raise FigureError(f"unreadable trajectory CSV {path}: {exc}") from None
    grids = [log.t for log in logs.values()]
    for t in grids[1:]:
        if not np.array_equal(t, grids[0]):
            raise FigureError("input CSVs do not share the same time grid")
    return logs


def _save(fig, output: Path, dpi: int) -> Path:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(output, dpi=dpi, metadata={"Software": "gpfigs"})
    finally:
        plt.close(fig)
    return output


def plot_accumulated_errors(spec: FigureSpec) -> Path:
    """Accumulated tracking error per output dimension, one curve per mode."""
    logs = _load(spec)
    m = next(iter(logs.values())).m
    fig, axes = plt.subplots(m, 1, figsize=(7.0, 2.8 * m), sharex=True,
                             squeeze=False)
    for k in range(m):
        ax = axes[k, 0]
        for mode, log in logs.items():
            ax.plot(log.t, log.accumulated[:, k],
                    label=MODE_LABELS.get(mode, mode),
                    color=MODE_COLORS.get(mode))
        ax.set_ylabel(rf"$E_{{{k + 1}}}(t)$")
        ax.grid(True, alpha=0.3)
    axes[0, 0].legend(loc="upper right")
    axes[-1, 0].set_xlabel("t [s]")
    fig.suptitle(spec.title or "Accumulated tracking errors")
    fig.tight_layout()
    return _save(fig, spec.output, spec.dpi)


def plot_trajectory3d(spec: FigureSpec) -> Path:
    """Agent and leader states over time on (t, x1, x2) axes."""
    if len(spec.inputs) != 1:
        raise FigureError("trajectory3d takes exactly one input CSV")
    (mode, log), = _load(spec).items()
    if log.m < 2:
        raise FigureError("trajectory3d needs at least two state dimensions")
    if log.steps < 2:
        raise FigureError("nothing to draw: trajectory has fewer than two rows")
    fig = plt.figure(figsize=(7.5, 6.0))
    ax = fig.add_subplot(projection="3d")
    for i in range(log.n):
        ax.plot(log.t, log.states[:, i, 0], log.states[:, i, 1],
                label=f"agent {i + 1}",
                color=AGENT_COLORS[i % len(AGENT_COLORS)], linewidth=1.0)
    ax.plot(log.t, log.leader[:, 0], log.leader[:, 1], label="leader",
            **spec.leader_style)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(r"$x_1$")
    ax.set_zlabel(r"$x_2$")
    ax.legend(loc="upper left")
    ax.set_title(spec.title or f"State trajectories ({MODE_LABELS.get(mode, mode)})")
    return _save(fig, spec.output, spec.dpi)

"""Render trajectories to image files next to the CSV output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sim import Trajectory


def save_trajectory_figure(tr: Trajectory, label: str, path) -> None:
    """Pitch and control force of one run, stacked on a shared time axis."""
    fig, (ax_pitch, ax_u) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    ax_pitch.plot(tr.t, tr.pitch, linewidth=1.2)
    ax_pitch.set_ylabel("pitch (rad)")
    ax_pitch.grid(True, alpha=0.4)
    title = label if not tr.diverged else f"{label} (diverged)"
    ax_pitch.set_title(title)
    ax_u.plot(tr.t, tr.u, linewidth=1.0, color="tab:orange")
    ax_u.set_ylabel("u (force units)")
    ax_u.set_xlabel("time (s)")
    ax_u.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_comparison_figure(named: list[tuple[str, Trajectory]], path) -> None:
    """Overlay the pitch responses of several runs."""
    fig, ax = plt.subplots(figsize=(9, 5))
    for label, tr in named:
        ax.plot(tr.t, tr.pitch, linewidth=1.1, label=label)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("pitch (rad)")
    ax.grid(True, alpha=0.4)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

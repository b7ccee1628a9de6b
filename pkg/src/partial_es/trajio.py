"""Trajectory CSV files and static SVG plots."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .simulator import Trajectory


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def csv_header(n: int, m: int) -> list:
    return ["t", *(f"x{i + 1}" for i in range(n)), "J", *(f"u{i + 1}" for i in range(m))]


def write_csv(traj: Trajectory, path) -> Path:
    """Columns ``t, x1..xn, J, u1..um``; floats at 17 significant digits."""
    path = Path(path)
    n = traj.states.shape[1]
    m = 0 if traj.controls is None else traj.controls.shape[1]
    cost = traj.cost if traj.cost is not None else np.full(len(traj), np.nan)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(n, m))
        for k in range(len(traj)):
            row = [traj.times[k], *traj.states[k], cost[k]]
            if m:
                row.extend(traj.controls[k])
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> Trajectory:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    if "t" not in header or "J" not in header:
        raise ValueError(f"{path}: header must contain 't' and 'J', got {header}")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    j = header.index("J")
    controls = data[:, j + 1:] if j + 1 < len(header) else None
    return Trajectory(data[:, 0], data[:, 1:j], controls, data[:, j])


def plot_trajectory(traj: Trajectory, path, y_indices=(0, 1), y_star=None, title: str = "") -> Path:
    """Two panels: the ``y`` projection in the plane and the remaining coordinates against time."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    a, b = y_indices
    rest = [i for i in range(traj.states.shape[1]) if i not in y_indices]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    ax1.plot(traj.states[:, a], traj.states[:, b], lw=0.8)
    ax1.plot(traj.states[0, a], traj.states[0, b], "o", color="tab:green", label="start")
    if y_star is not None:
        ax1.plot(y_star[0], y_star[1], "x", color="tab:red", ms=9, label="y*")
    ax1.set_xlabel(f"x{a + 1}")
    ax1.set_ylabel(f"x{b + 1}")
    ax1.legend(loc="best")
    ax1.grid(True, alpha=0.3)
    for i in rest:
        ax2.plot(traj.times, traj.states[:, i], lw=0.8, label=f"x{i + 1}")
    ax2.set_xlabel("t")
    ax2.grid(True, alpha=0.3)
    if rest:
        ax2.legend(loc="best")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path

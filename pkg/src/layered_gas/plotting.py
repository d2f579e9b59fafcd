"""Static SVG renderings of run records, sweeps and dispersion curves."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_snapshots(record, path, field: str = "p", title: str = "") -> Path:
    """One panel per snapshot, the chosen field against the grid coordinate."""
    snaps = record.snapshots
    fig, axes = plt.subplots(len(snaps), 1, figsize=(8, 1.8 * len(snaps) + 0.5), sharex=True, squeeze=False)
    for ax, s in zip(axes[:, 0], snaps):
        ax.plot(s.coord, s.fields[field] if field in s.fields else getattr(s, field), lw=0.8)
        ax.set_ylabel(field)
        ax.text(0.01, 0.85, f"t = {s.t:g}", transform=ax.transAxes, fontsize=8)
    axes[-1, 0].set_xlabel("mass coordinate" if snaps[0].frame == "lagrangian" else "position")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_overlay(records: dict, t: float, path, xlim=None) -> Path:
    """Pressure of several records at one time on shared axes."""
    fig, ax = plt.subplots(figsize=(8, 3))
    for label, rec in records.items():
        s = rec.at(t)
        ax.plot(s.coord, s.p, lw=0.8, label=label)
    if xlim:
        ax.set_xlim(*xlim)
    ax.set_xlabel("coordinate")
    ax.set_ylabel("p")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_series(xs, ys, path, xlabel="", ylabel="", logx=False, logy=False, labels=None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ys = np.atleast_2d(ys)
    for j, y in enumerate(ys):
        ax.plot(xs, y, marker="o", ms=3, lw=1, label=None if labels is None else labels[j])
    ax.set_xscale("log" if logx else "linear")
    ax.set_yscale("log" if logy else "linear")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if labels is not None:
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path

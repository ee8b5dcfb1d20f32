"""Figure rendering for simulation reports.

Renders with the Agg backend straight to files; figure bytes carry no
timestamps so identical inputs produce identical images.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .ltesim import ReportRow, SimTrace  # noqa: E402

__all__ = ["save_report_bars", "save_reward_curves"]

_METADATA = {"Software": "rankfuse"}


def save_report_bars(rows: Sequence[ReportRow], path: str) -> None:
    """Mean page reward per policy with bootstrap interval whiskers."""
    if not rows:
        raise ValueError("nothing to plot")
    names = [r.policy for r in rows]
    means = np.array([r.mean_reward for r in rows])
    below = means - np.array([r.ci_low for r in rows])
    above = np.array([r.ci_high for r in rows]) - means
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(
        names,
        means,
        yerr=np.vstack([below, above]),
        capsize=5,
        color="#4878d0",
        edgecolor="black",
        linewidth=0.6,
    )
    ax.set_ylabel("mean page reward")
    ax.set_ylim(bottom=0.0)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_METADATA)
    plt.close(fig)


def save_reward_curves(
    traces: Sequence[SimTrace], path: str, window: int = 500
) -> None:
    """Rolling mean reward over pages, one line per policy."""
    if not traces:
        raise ValueError("nothing to plot")
    if window < 1:
        raise ValueError("window must be at least 1")
    fig, ax = plt.subplots(figsize=(6, 4))
    for trace in traces:
        rewards = np.array([rec.reward for rec in trace.records])
        w = min(window, len(rewards))
        smooth = np.convolve(rewards, np.ones(w) / w, mode="valid")
        ax.plot(np.arange(w - 1, len(rewards)), smooth, label=trace.policy)
    ax.set_xlabel("page")
    ax.set_ylabel(f"reward (rolling mean, window {window})")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_METADATA)
    plt.close(fig)

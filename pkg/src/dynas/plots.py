"""Fixed-target ERT plots written as deterministic SVG."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "dynas"


def fixed_target_svg(path, series, title: str = "") -> None:
    """Plot ERT against target (log y) for each ``(label, [(target, ert), ...])``.

    Infinite ERTs are dropped. Output is byte-identical for identical input.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, points in series:
        pts = [(t, e) for t, e in points if math.isfinite(e) and e > 0]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker=".", linewidth=1.2, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("target")
    ax.set_ylabel("ERT (evaluations)")
    if title:
        ax.set_title(title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)

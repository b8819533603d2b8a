from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .economics import MetricPoint
from .pareto import ParetoFront, Projection, axis_value

logger = logging.getLogger(__name__)

COLOR_POINT = "#4a6fa5"
COLOR_FRONT = "#d62728"

AXIS_LABELS = {
    "quality": "Quality (0-1)",
    "time": "Time per model (s)",
    "cost": "Cost per model (USD)",
}


def _apply_style() -> None:
    plt.rcParams.update({
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        # Stable element ids and text-as-text keep the SVG byte-reproducible.
        "svg.hashsalt": "bpmn-bench",
        "svg.fonttype": "none",
    })


def choose_axis_scale(axis: str, values: Sequence[float]) -> str:
    """Cost and time are log-scaled unless some value is <= 0; quality is always linear."""
    if axis == "quality":
        return "linear"
    if values and all(v > 0 for v in values):
        return "log"
    return "linear"


def front_svg_name(projection: Projection) -> str:
    return f"pareto_{projection.x_axis}_{projection.y_axis}.svg"


def render_front_svg(
    points: Sequence[MetricPoint],
    names: Sequence[str],
    projection: Projection,
    front: ParetoFront,
    out_path: Path,
) -> Path:
    """Scatter of every point, front members in red joined by a line."""
    _apply_style()

    xs = [axis_value(p, projection.x_axis) for p in points]
    ys = [axis_value(p, projection.y_axis) for p in points]
    x_scale = choose_axis_scale(projection.x_axis, xs)
    y_scale = choose_axis_scale(projection.y_axis, ys)

    notices: List[str] = []
    for axis, scale in ((projection.x_axis, x_scale), (projection.y_axis, y_scale)):
        if axis != "quality" and scale == "linear":
            notices.append(f"{axis} axis linear (values <= 0)")

    fig, ax = plt.subplots(figsize=(7, 5))
    others = [i for i in range(len(points)) if i not in front]
    if others:
        ax.scatter([xs[i] for i in others], [ys[i] for i in others], s=40, c=COLOR_POINT, zorder=2, label="dominated")

    members = list(front.members)
    ax.scatter([xs[i] for i in members], [ys[i] for i in members], s=60, c=COLOR_FRONT, zorder=3, label="Pareto front")
    if len(members) > 1:
        ax.plot([xs[i] for i in members], [ys[i] for i in members], color=COLOR_FRONT, linewidth=1.2, zorder=2)

    for i, name in enumerate(names):
        ax.annotate(name, (xs[i], ys[i]), textcoords="offset points", xytext=(4, 4), fontsize=7)

    ax.set_xscale(x_scale)
    ax.set_yscale(y_scale)
    ax.set_xlabel(AXIS_LABELS[projection.x_axis])
    ax.set_ylabel(AXIS_LABELS[projection.y_axis])

    title = f"{projection.y_axis.capitalize()} vs. {projection.x_axis} ({len(members)} Pareto-optimal)"
    if notices:
        title += "\n" + "; ".join(notices)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=7)

    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg", bbox_inches="tight", facecolor="white", metadata={"Date": None})
    plt.close(fig)
    logger.debug("Wrote %s (x=%s, y=%s)", out_path, x_scale, y_scale)
    return out_path

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .economics import MetricPoint
from .errors import EmptyInputError

Point2D = Tuple[float, float]


class Direction(str, Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"


@dataclass(frozen=True)
class Orientation:
    x: Direction
    y: Direction

    def oriented(self, p: Point2D) -> Point2D:
        """Map a point into "larger is better" on both axes."""
        sx = 1.0 if self.x is Direction.MAXIMIZE else -1.0
        sy = 1.0 if self.y is Direction.MAXIMIZE else -1.0
        return sx * p[0], sy * p[1]


@dataclass(frozen=True)
class ParetoFront:
    members: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, index: object) -> bool:
        return index in self.members


@dataclass(frozen=True)
class Projection:
    name: str
    x_axis: str   # quality | time | cost
    y_axis: str
    orientation: Orientation


AXIS_DIRECTION: Dict[str, Direction] = {
    "quality": Direction.MAXIMIZE,
    "time": Direction.MINIMIZE,
    "cost": Direction.MINIMIZE,
}


def _projection(x: str, y: str) -> Projection:
    return Projection(name=f"{x}_{y}", x_axis=x, y_axis=y, orientation=Orientation(AXIS_DIRECTION[x], AXIS_DIRECTION[y]))


# The three 2-D perspectives; no 3-D front is computed.
PROJECTIONS: Tuple[Projection, ...] = (
    _projection("cost", "quality"),
    _projection("time", "quality"),
    _projection("cost", "time"),
)


def axis_value(point: MetricPoint, axis: str) -> float:
    if axis == "quality":
        return point.quality
    if axis == "time":
        return point.time_seconds
    if axis == "cost":
        return point.cost_usd
    raise KeyError(axis)


# ============================================================
# Dominance + front
# ============================================================

def dominates(a: Point2D, b: Point2D, orientation: Orientation) -> bool:
    """At least as good on both axes and strictly better on one."""
    ax, ay = orientation.oriented(a)
    bx, by = orientation.oriented(b)
    return ax >= bx and ay >= by and (ax > bx or ay > by)


def pareto_front_2d(points: Sequence[Point2D], orientation: Orientation) -> ParetoFront:
    """
    Non-dominated subset by sort-and-sweep, O(n log n).

    Points are visited by descending oriented x; within a group of equal x
    only points carrying the group's best y can survive, and only if that y
    beats everything seen at strictly better x. Duplicates of a front point
    are all kept.
    """
    if not points:
        raise EmptyInputError("Pareto front of an empty point set")
    for p in points:
        if not (math.isfinite(p[0]) and math.isfinite(p[1])):
            raise ValueError(f"Non-finite point: {p}")

    oriented = [orientation.oriented(p) for p in points]
    order = sorted(range(len(points)), key=lambda i: (-oriented[i][0], -oriented[i][1], i))

    members: List[int] = []
    best_y = -math.inf
    pos = 0
    while pos < len(order):
        group_x = oriented[order[pos]][0]
        end = pos
        while end < len(order) and oriented[order[end]][0] == group_x:
            end += 1
        group = order[pos:end]
        group_best = oriented[group[0]][1]
        if group_best > best_y:
            members.extend(i for i in group if oriented[i][1] == group_best)
            best_y = group_best
        pos = end

    members.sort(key=lambda i: (points[i][0], i))
    return ParetoFront(members=tuple(members))


def pareto_fronts(points: Sequence[MetricPoint]) -> Dict[str, ParetoFront]:
    """One front per projection in PROJECTIONS, keyed by projection name."""
    fronts: Dict[str, ParetoFront] = {}
    for proj in PROJECTIONS:
        coords = [(axis_value(p, proj.x_axis), axis_value(p, proj.y_axis)) for p in points]
        fronts[proj.name] = pareto_front_2d(coords, proj.orientation)
    return fronts

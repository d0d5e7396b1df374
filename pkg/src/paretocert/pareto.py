"""Pareto dominance and efficient-set extraction on finite clouds.

Maximization convention throughout: a dominates b when a >= b componentwise
and a != b. Points with equal criterion vectors never dominate each other, so
duplicates of an efficient value all survive the filter.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DimensionError
from .problems import point_rows


class Dominance(Enum):
    DOMINATES = "dominates"
    DOMINATED = "dominated"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def compare(a, b) -> Dominance:
    av = tuple(float(v) for v in a)
    bv = tuple(float(v) for v in b)
    if len(av) != len(bv):
        raise DimensionError(f"cannot compare vectors of lengths {len(av)} and {len(bv)}")
    ge = all(x >= y for x, y in zip(av, bv))
    le = all(x <= y for x, y in zip(av, bv))
    if ge and le:
        return Dominance.EQUAL
    if ge:
        return Dominance.DOMINATES
    if le:
        return Dominance.DOMINATED
    return Dominance.INCOMPARABLE


def dominates(a, b) -> bool:
    """True iff a >= b componentwise and a != b."""
    return compare(a, b) is Dominance.DOMINATES


def pareto_filter(cloud) -> list[int]:
    """Indices of points not dominated by any other point, in ascending order.

    Uses a sort-based scan for two criteria and a vectorized pairwise check
    otherwise.
    """
    rows = point_rows(cloud)
    if len(rows[0]) == 2:
        return _filter_two_criteria(rows)
    return _filter_general(rows)


def _filter_two_criteria(rows) -> list[int]:
    # Descending by first criterion, then by second; a point survives iff it
    # has the best second coordinate of its first-coordinate group and beats
    # every group with a strictly larger first coordinate.
    order = sorted(range(len(rows)), key=lambda i: (-rows[i][0], -rows[i][1]))
    keep: list[int] = []
    best_second = -np.inf
    i = 0
    while i < len(order):
        j = i
        first = rows[order[i]][0]
        while j < len(order) and rows[order[j]][0] == first:
            j += 1
        group = order[i:j]
        group_best = rows[group[0]][1]
        if group_best > best_second:
            keep.extend(idx for idx in group if rows[idx][1] == group_best)
            best_second = group_best
        i = j
    return sorted(keep)


def _filter_general(rows) -> list[int]:
    pts = np.asarray(rows, dtype=float)
    keep = []
    for i in range(len(pts)):
        ge = (pts >= pts[i]).all(axis=1)
        ne = (pts != pts[i]).any(axis=1)
        if not np.any(ge & ne):
            keep.append(i)
    return keep

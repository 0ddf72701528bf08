"""Test-side oracles.

Covering and packing use the package's exhaustive reference search (a
complete candidate-set search, structurally independent of the greedy
sweeps it validates); the Hausdorff oracle is a dense point grid.
"""

from __future__ import annotations

from fractalkit.geometry import CompactSet
from fractalkit.reference import exhaustive_covering, exhaustive_packing

oracle_covering = exhaustive_covering
oracle_packing = exhaustive_packing


def grid_points(compact: CompactSet, per_interval: int = 200) -> list[float]:
    pts = []
    for a, b in compact.intervals:
        pts.append(a)
        pts.append(b)
        for j in range(1, per_interval):
            pts.append(a + (b - a) * j / per_interval)
    return pts


def oracle_hausdorff(first: CompactSet, second: CompactSet,
                     per_interval: int = 200) -> tuple[float, float]:
    """Dense-grid lower bound for the Hausdorff distance, plus the grid
    spacing bounding how far below the true value it can sit."""
    pts1 = grid_points(first, per_interval)
    pts2 = grid_points(second, per_interval)
    d1 = max(second.distance_to(x) for x in pts1)
    d2 = max(first.distance_to(y) for y in pts2)
    spacing = max(
        max((b - a) / per_interval for a, b in first.intervals),
        max((b - a) / per_interval for a, b in second.intervals),
    )
    return max(d1, d2), spacing

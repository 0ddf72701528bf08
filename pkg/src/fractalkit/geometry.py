"""Exact 1-D set computations on finite unions of closed intervals in [0, 1].

Covering and packing numbers use greedy sweeps that are optimal in one
dimension; the Hausdorff metric is evaluated exactly from endpoints and
gap midpoints.  All comparisons are plain float comparisons, so results
are reproducible bit for bit.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

Interval = tuple[float, float]


@dataclass(frozen=True)
class CompactSet:
    """Finite union of closed subintervals of [0, 1], disjoint and sorted.

    Degenerate intervals (a == b) encode points.  The empty set is the
    unique instance with no intervals (``EMPTY``); every other instance
    keeps strict gaps between consecutive intervals, so structural
    equality is set equality.
    """

    intervals: tuple[Interval, ...]

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    def min(self) -> float:
        if self.is_empty:
            raise ValueError("empty set has no minimum")
        return self.intervals[0][0]

    def max(self) -> float:
        if self.is_empty:
            raise ValueError("empty set has no maximum")
        return self.intervals[-1][1]

    def total_length(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def __contains__(self, x: float) -> bool:
        if self.is_empty:
            return False
        i = bisect_right(self._starts(), x) - 1
        return i >= 0 and x <= self.intervals[i][1]

    def _starts(self) -> list[float]:
        return [a for a, _ in self.intervals]

    def distance_to(self, x: float) -> float:
        """Distance from the point x to the set (0 if x is a member)."""
        if self.is_empty:
            raise ValueError("distance undefined for empty set")
        best = math.inf
        for a, b in self.intervals:
            if x < a:
                best = min(best, a - x)
            elif x > b:
                best = min(best, x - b)
            else:
                return 0.0
        return best

    def union(self, other: "CompactSet") -> "CompactSet":
        return normalize(list(self.intervals) + list(other.intervals))

    def gaps(self) -> list[Interval]:
        """Open gaps between consecutive intervals, as (left, right) pairs."""
        out = []
        for (_, b), (a2, _) in zip(self.intervals, self.intervals[1:]):
            out.append((b, a2))
        return out


EMPTY = CompactSet(())


def normalize(raw: Iterable[Interval]) -> CompactSet:
    """Sort intervals and merge overlapping or touching ones.

    The pointwise union is preserved; touching closed intervals merge
    because their union is a single closed interval.  An empty input
    yields the empty-set sentinel.  Idempotent.
    """
    items = sorted((float(a), float(b)) for a, b in raw)
    if not items:
        return EMPTY
    merged: list[list[float]] = []
    for a, b in items:
        if b < a:
            raise ValueError(f"interval has endpoints out of order: [{a}, {b}]")
        if merged and a <= merged[-1][1]:
            if b > merged[-1][1]:
                merged[-1][1] = b
        else:
            merged.append([a, b])
    return CompactSet(tuple((a, b) for a, b in merged))


def from_points(points: Iterable[float]) -> CompactSet:
    return normalize([(x, x) for x in points])


def _check_scale(r: float) -> None:
    if not (r > 0.0):
        raise ValueError(f"scale must be positive, got {r}")


def _directed_sup_dist(src: CompactSet, dst: CompactSet) -> float:
    # sup over x in src of dist(x, dst).  On each src interval the
    # distance function is piecewise linear with local maxima only at
    # the interval's endpoints or at dst gap midpoints inside it.
    best = 0.0
    for a, b in src.intervals:
        best = max(best, dst.distance_to(a), dst.distance_to(b))
    for g_lo, g_hi in dst.gaps():
        mid = 0.5 * (g_lo + g_hi)
        if mid in src:
            best = max(best, mid - g_lo)
    return best


def hausdorff_distance(first: CompactSet, second: CompactSet) -> float:
    """Exact Hausdorff distance between two nonempty interval unions."""
    if first.is_empty or second.is_empty:
        raise ValueError("undefined for empty set")
    return max(_directed_sup_dist(first, second),
               _directed_sup_dist(second, first))


def covering_number(compact: CompactSet, r: float) -> int:
    """Minimal number of closed balls of radius r (length 2r) covering the set.

    Greedy left-to-right sweep: each ball is placed with its left edge at
    the infimum of the still-uncovered part, which is optimal in 1-D.
    Returns 0 for the empty set.
    """
    if compact.is_empty:
        return 0
    _check_scale(r)
    width = 2.0 * r
    count = 0
    covered_to = -math.inf
    for a, b in compact.intervals:
        if b <= covered_to:
            continue
        start = a if a > covered_to else covered_to
        # balls at start + j*width; smallest k with start + k*width >= b
        k = int((b - start) / width) if b > start else 0
        while start + k * width < b:
            k += 1
        while k > 1 and start + (k - 1) * width >= b:
            k -= 1
        k = max(k, 1)
        count += k
        covered_to = start + k * width
    return count


def packing_number(compact: CompactSet, r: float) -> int:
    """Maximal number of disjoint closed balls of radius r centered in the set.

    Disjoint means empty intersection of closed balls: centers strictly
    more than 2r apart (tangent balls do not count).  Greedy leftmost
    feasible center selection attains the maximum in 1-D; when the next
    feasible center is an unattained infimum inside an interval chunk,
    the limit position is used, which is realizable by arbitrarily small
    interior perturbations.  Returns 0 for the empty set.
    """
    if compact.is_empty:
        return 0
    _check_scale(r)
    width = 2.0 * r
    intervals = compact.intervals
    count = 0
    idx = 0
    pos = intervals[0][0]
    while True:
        a, b = intervals[idx]
        # further centers inside [pos, b]: j*width strictly less than b - pos
        j = int((b - pos) / width) if b > pos else 0
        while pos + j * width >= b and j > 0:
            j -= 1
        while pos + (j + 1) * width < b:
            j += 1
        count += j + 1
        threshold = pos + (j + 1) * width  # next center must exceed this
        nxt = None
        for k in range(idx, len(intervals)):
            a2, b2 = intervals[k]
            if b2 > threshold:
                nxt = (k, a2 if a2 > threshold else threshold)
                break
        if nxt is None:
            return count
        idx, pos = nxt


def count_table(compact: CompactSet,
                scales: Sequence[float]) -> list[tuple[float, int, int]]:
    """Rows (r, N_r, P_r) for a strictly decreasing list of scales."""
    scales = list(scales)
    if not scales:
        return []
    for r in scales:
        _check_scale(r)
    for r1, r2 in zip(scales, scales[1:]):
        if not r2 < r1:
            raise ValueError("scales must be strictly decreasing")
    return [(r, covering_number(compact, r), packing_number(compact, r))
            for r in scales]


def table_to_csv(rows: Sequence[tuple[float, int, int]]) -> str:
    """Serialize count-table rows, descending r, full float precision."""
    lines = ["r,N_r,P_r"]
    for r, n, p in rows:
        lines.append(f"{r!r},{n},{p}")
    return "\n".join(lines) + "\n"

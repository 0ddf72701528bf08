"""Exhaustive reference computations used to validate the greedy sweeps.

Covering searches every candidate ball-edge position (the closure of the
interval endpoints under shifts by the ball width provably contains a
minimal cover).  Packing runs a complete DP over a perturbation-closed
candidate set of centers, so strict disjointness ties are handled exactly.
Both are deliberately independent of the greedy algorithms they check.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from functools import lru_cache

from .geometry import CompactSet


def exhaustive_covering(compact: CompactSet, r: float, kmax: int = 24) -> int:
    """Minimal number of closed length-2r balls covering the set."""
    if compact.is_empty:
        return 0
    width = 2.0 * r
    intervals = compact.intervals
    base = {e for iv in intervals for e in iv}
    cands = sorted(base | {v + m * width for v in base
                           for m in range(1, kmax + 1)})

    def leftmost_uncovered(t: float) -> float | None:
        for a, b in intervals:
            if a > t:
                return a
            if b > t:
                return t
        return None

    @lru_cache(maxsize=None)
    def solve(t: float) -> int:
        p = leftmost_uncovered(t)
        if p is None:
            return 0
        lo = bisect_left(cands, p - width)
        hi = bisect_right(cands, p)
        options = set(cands[lo:hi])
        options.add(p)
        # a ball whose right edge fails to pass the frontier covers nothing new
        options = {c for c in options if c + width > t}
        return 1 + min(solve(c + width) for c in options)

    count = solve(-math.inf)
    solve.cache_clear()
    return count


def exhaustive_packing(compact: CompactSet, r: float, kmax: int = 24) -> int:
    """Maximal number of centers in the set pairwise strictly more than 2r
    apart: complete DP with suffix maxima over the candidate centers."""
    if compact.is_empty:
        return 0
    width = 2.0 * r
    base = set()
    for a, b in compact.intervals:
        base.add(a)
        base.add(b)
        for m in range(1, kmax + 1):
            base.add(a + m * width)
            base.add(b + m * width)
    vals = sorted(base)
    gaps = [y - x for x, y in zip(vals, vals[1:]) if y > x]
    mu = (min(gaps) if gaps else 1.0) / (kmax + 2)
    cands = sorted({v + s * mu for v in vals for s in range(kmax + 1)
                    if (v + s * mu) in compact})
    n = len(cands)
    best = [0] * n
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        j = bisect_right(cands, cands[i] + width)
        best[i] = 1 + (suffix[j] if j < n else 0)
        suffix[i] = max(best[i], suffix[i + 1])
    return suffix[0]

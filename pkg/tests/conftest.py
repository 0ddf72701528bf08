"""Shared helpers: seeded generators for randomized geometry trials.

Endpoints and scales are dyadic rationals so that every comparison in
the exact sweeps is reproducible and tie cases are genuinely exercised.
"""

from __future__ import annotations

import numpy as np

from fractalkit.geometry import CompactSet, normalize

GRID = 2.0 ** -12


def random_compact(rng: np.random.Generator, max_intervals: int = 8,
                   allow_points: bool = True) -> CompactSet:
    k = int(rng.integers(1, max_intervals + 1))
    intervals = []
    for _ in range(k):
        a = int(rng.integers(0, 4097))
        if allow_points and rng.random() < 0.3:
            b = a
        else:
            b = min(4096, a + int(rng.integers(1, 400)))
        intervals.append((a * GRID, b * GRID))
    return normalize(intervals)


def random_scale(rng: np.random.Generator, lo_units: int = 4,
                 hi_units: int = 2048) -> float:
    return int(rng.integers(lo_units, hi_units + 1)) * GRID

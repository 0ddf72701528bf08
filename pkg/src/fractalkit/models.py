"""Built-in construction models and their reduction-ratio sequences.

The two "example" models place offspring inside the unit cell with right
endpoints 1/n^p and deterministic lengths V_n that shrink geometrically,
so every series tail used elsewhere has a closed-form geometric bound.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.optimize import minimize_scalar

from .construction import (
    ModelSpec,
    OffspringDraw,
    RatioLaw,
    SimilarityMap,
    truncate_finite,
)
from .geometry import CompactSet, from_points

_GRID_POINTS = 64


def _endpoint_gap(n: int, p: float) -> float:
    return n ** -p - (n + 1) ** -p


def _inf_gap_over_p(n: int, p_lo: float, p_hi: float) -> float:
    """Infimum of p -> 1/n^p - 1/(n+1)^p over [p_lo, p_hi].

    The inner function has at most one interior critical point, so a
    coarse grid plus a bounded local polish around the best grid point
    certifies the minimum; endpoints are always included.
    """
    grid = [p_lo + (p_hi - p_lo) * i / (_GRID_POINTS - 1)
            for i in range(_GRID_POINTS)]
    values = [_endpoint_gap(n, p) for p in grid]
    best_idx = min(range(_GRID_POINTS), key=values.__getitem__)
    best = values[best_idx]
    lo = grid[max(best_idx - 1, 0)]
    hi = grid[min(best_idx + 1, _GRID_POINTS - 1)]
    if hi > lo:
        res = minimize_scalar(lambda p: _endpoint_gap(n, p),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return float(min(best, _endpoint_gap(n, p_lo), _endpoint_gap(n, p_hi)))


@lru_cache(maxsize=None)
def vn_example1(n: int) -> float:
    """Offspring length (1/16^n) * inf over p in [1, 2] of the endpoint gap."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 16.0 ** -n * _inf_gap_over_p(n, 1.0, 2.0)


@lru_cache(maxsize=None)
def vn_example2(n: int) -> float:
    """Offspring length (1/1024)^n * inf over p in [1, 4] of the endpoint gap."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1024.0 ** -n * _inf_gap_over_p(n, 1.0, 4.0)


# geometric domination ratio_n <= C * q^n for the example series: the inner
# infimum is at most the p=1 gap 1/(n(n+1)) <= 1/2
_EX1_DOMINATION = (0.5, 1.0 / 16.0)
_EX2_DOMINATION = (0.5, 1.0 / 1024.0)


def _series_tail_power(domination: tuple[float, float], first_omitted: int,
                       t: float) -> float:
    """Upper bound on sum over n >= first_omitted of ratio_n^t."""
    c, q = domination
    qt = q ** t
    if qt >= 1.0:
        return math.inf
    return (c ** t) * qt ** first_omitted / (1.0 - qt)


def _series_spawn(ratio_fn, domination, endpoint_fn):
    """Spawn for an infinite series of offspring with right endpoints
    endpoint_fn(n, shared, level) and deterministic ratios ratio_fn(n).

    Keeps exactly the offspring with absolute diameter >= eps_trunc; the
    geometric domination bounds the enumeration and the reported tails.
    """
    c, q = domination

    def spawn(shared, address, stream, level, parent_diameter, eps_trunc):
        kept: list[tuple[int, SimilarityMap]] = []
        first_omitted = None
        finite_omitted = 0
        hull_hi = None
        n = 1
        while c * q ** n * parent_diameter >= eps_trunc or n == 1:
            v = ratio_fn(n)
            right = endpoint_fn(n, shared, level)
            if v * parent_diameter >= eps_trunc:
                kept.append((n, SimilarityMap(ratio=v, offset=right - v)))
            else:
                finite_omitted += 1
                if first_omitted is None:
                    first_omitted = n
                    hull_hi = right
            n += 1
        if first_omitted is None:
            first_omitted = n
            hull_hi = endpoint_fn(n, shared, level)
        tail_from = first_omitted
        return OffspringDraw(
            children=tuple(kept),
            omitted=None,
            omitted_hull=(0.0, hull_hi),
            omitted_ratio_power=lambda t: _series_tail_power(
                domination, tail_from, t),
        )

    return spawn


def cantor(ratio: float, arity: int = 2) -> ModelSpec:
    """Deterministic model: arity equally spaced children of equal ratio,
    leftmost child at the left endpoint and rightmost at the right."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if arity < 1:
        raise ValueError("arity must be >= 1")
    if arity * ratio > 1.0:
        raise ValueError(f"arity*ratio = {arity * ratio} > 1: OSC impossible")
    if arity == 1:
        offsets = [0.0]
    else:
        # equal spacing, leftmost at 0 and rightmost ending at 1
        offsets = [i * (1.0 - ratio) / (arity - 1) for i in range(arity)]
    maps = tuple(SimilarityMap(ratio=ratio, offset=o) for o in offsets)

    def spawn(shared, address, stream, level, parent_diameter, eps_trunc):
        return truncate_finite(maps, parent_diameter, eps_trunc)

    return ModelSpec(
        name="cantor",
        params={"ratio": ratio, "arity": arity},
        deterministic_ratios=True,
        self_similar=True,
        finite_branching=True,
        spawn=spawn,
        max_ratio=ratio,
        arity=arity,
        ratio_sequence=lambda n: ratio,
        ratio_count=arity,
    )


def _equal_gap_maps(ratios) -> tuple[SimilarityMap, ...]:
    arity = len(ratios)
    total = float(sum(ratios))
    gap = (1.0 - total) / (arity - 1) if arity > 1 else 0.0
    maps = []
    offset = 0.0
    for r in ratios:
        maps.append(SimilarityMap(ratio=float(r), offset=offset))
        offset += r + gap
    return tuple(maps)


def homogeneous_random(ratio_law: RatioLaw, arity: int = 2) -> ModelSpec:
    """Each node independently draws arity i.i.d. ratios from ratio_law;
    children are packed left to right with equal gaps."""
    if arity < 1:
        raise ValueError("arity must be >= 1")
    if arity * ratio_law.hi > 1.0:
        raise ValueError(
            f"arity*max_ratio = {arity * ratio_law.hi} > 1: OSC impossible")

    def sample_vector(rng: np.random.Generator) -> tuple[float, ...]:
        return tuple(float(v) for v in ratio_law.sample(rng, arity))

    def spawn(shared, address, stream, level, parent_diameter, eps_trunc):
        if ratio_law.is_degenerate:
            ratios = (ratio_law.lo,) * arity
        else:
            ratios = sample_vector(stream.generator)
        return truncate_finite(_equal_gap_maps(ratios), parent_diameter,
                               eps_trunc)

    deterministic = ratio_law.is_degenerate
    return ModelSpec(
        name="homogeneous",
        params={"law": ratio_law.kind, "lo": ratio_law.lo,
                "hi": ratio_law.hi, "arity": arity},
        deterministic_ratios=deterministic,
        self_similar=True,
        finite_branching=True,
        spawn=spawn,
        max_ratio=ratio_law.hi,
        arity=arity,
        sample_ratio_vector=None if deterministic else sample_vector,
        place=_equal_gap_maps,
        ratio_sequence=(lambda n: ratio_law.lo) if deterministic else None,
        ratio_count=arity if deterministic else None,
        ratio_law=ratio_law,
    )


def example1(p: float | None = None) -> ModelSpec:
    """Offspring with right endpoints 1/n^p and lengths vn_example1(n) at
    every level.  p is drawn uniformly on [1, 2] once per realization and
    reused at all nodes unless fixed here."""
    if p is not None and not 1.0 <= p <= 2.0:
        raise ValueError("fixed p must lie in [1, 2]")

    def draw_shared(rng: np.random.Generator) -> dict:
        if p is not None:
            return {"p": float(p)}
        return {"p": float(rng.uniform(1.0, 2.0))}

    def endpoint(n, shared, level):
        return n ** -shared["p"]

    return ModelSpec(
        name="example1",
        params={} if p is None else {"p": p},
        deterministic_ratios=True,
        self_similar=True,
        finite_branching=False,
        spawn=_series_spawn(vn_example1, _EX1_DOMINATION, endpoint),
        max_ratio=vn_example1(1),
        draw_shared=draw_shared,
        ratio_sequence=vn_example1,
        ratio_count=None,
        tail_domination=_EX1_DOMINATION,
    )


def _ex2_endpoint(n, shared, level):
    if level == 0:
        return n ** -shared["p"]
    return float(n) ** -4.0


def example2() -> ModelSpec:
    """Level 1 places offspring at right endpoints 1/n^p with p uniform on
    [1, 2]; all deeper levels use right endpoints 1/n^4.  Ratios are the
    fixed sequence vn_example2 throughout, so only level 1 breaks
    self-similarity."""

    def draw_shared(rng: np.random.Generator) -> dict:
        return {"p": float(rng.uniform(1.0, 2.0))}

    return ModelSpec(
        name="example2",
        params={},
        deterministic_ratios=True,
        self_similar=False,
        finite_branching=False,
        level_dependent=True,
        spawn=_series_spawn(vn_example2, _EX2_DOMINATION, _ex2_endpoint),
        max_ratio=vn_example2(1),
        draw_shared=draw_shared,
        ratio_sequence=vn_example2,
        ratio_count=None,
        tail_domination=_EX2_DOMINATION,
    )


def example2_deep() -> ModelSpec:
    """The self-similar law of example2's depth >= 2 subtree: right
    endpoints 1/n^4 with ratios vn_example2 at every level."""
    return ModelSpec(
        name="example2_deep",
        params={},
        deterministic_ratios=True,
        self_similar=True,
        finite_branching=False,
        spawn=_series_spawn(vn_example2, _EX2_DOMINATION,
                            lambda n, shared, level: float(n) ** -4.0),
        max_ratio=vn_example2(1),
        ratio_sequence=vn_example2,
        ratio_count=None,
        tail_domination=_EX2_DOMINATION,
    )


def orbit_set(p: float, cutoff: float) -> CompactSet:
    """The point set {1/n^p}, truncated where consecutive gaps drop below
    cutoff so every included gap is resolvable at the fit scales."""
    if not p > 0.0:
        raise ValueError("p must be positive")
    if not cutoff > 0.0:
        raise ValueError("cutoff must be positive")
    points = [1.0]
    n = 1
    while _endpoint_gap(n, p) >= cutoff:
        points.append((n + 1) ** -p)
        n += 1
    return from_points(points)


def get_model(name: str, **params) -> ModelSpec:
    """Build a model from its CLI name and parameters."""
    if name == "cantor":
        return cantor(float(params["ratio"]), int(params.get("arity", 2)))
    if name == "homogeneous":
        law = RatioLaw(kind=str(params.get("law", "uniform")),
                       lo=float(params["lo"]), hi=float(params["hi"]))
        return homogeneous_random(law, int(params.get("arity", 2)))
    if name == "example1":
        p = params.get("p")
        return example1(None if p is None else float(p))
    if name == "example2":
        return example2()
    if name == "example2_deep":
        return example2_deep()
    raise ValueError(f"unknown model {name!r}")

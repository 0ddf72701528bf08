"""Sampling of random recursive constructions on the unit interval.

A realization is a truncated tree of nested cells, each obtained from its
parent by a similarity map.  Per-node randomness comes from counter-based
streams keyed by (seed, address), so a node's draw does not depend on
traversal order and the recursive and fractal sampling semantics consume
identical numbers at identical addresses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .addressing import Address, ROOT, is_antichain
from .geometry import CompactSet, from_points, normalize

SEMANTICS = ("recursive", "fractal")

# spawn_key digit reserved for the per-realization shared stream; node
# addresses use digits >= 1 only
_SHARED_KEY = (0,)


@dataclass(frozen=True)
class SimilarityMap:
    """Affine contraction x -> offset + orientation * ratio * x on [0, 1]."""

    ratio: float
    offset: float
    orientation: int = 1

    def __post_init__(self):
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"ratio must lie in (0, 1], got {self.ratio}")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        lo, hi = self.interval()
        if lo < -1e-9 or hi > 1.0 + 1e-9:
            raise ValueError(f"map image [{lo}, {hi}] leaves the unit interval")

    @staticmethod
    def identity() -> "SimilarityMap":
        return SimilarityMap(1.0, 0.0, 1)

    def apply(self, x: float) -> float:
        return self.offset + self.orientation * self.ratio * x

    def interval(self) -> tuple[float, float]:
        if self.orientation == 1:
            return (self.offset, self.offset + self.ratio)
        return (self.offset - self.ratio, self.offset)

    def compose(self, inner: "SimilarityMap") -> "SimilarityMap":
        """self after inner, as a single similarity."""
        return SimilarityMap(
            self.ratio * inner.ratio,
            self.offset + self.orientation * self.ratio * inner.offset,
            self.orientation * inner.orientation,
        )


@dataclass(frozen=True)
class OffspringDraw:
    """One node's offspring after truncation.

    children pairs each kept offspring's law index with its unit-cell map.
    omitted is the number of truncated offspring (None for an infinite
    tail); omitted_hull spans their positions in unit coordinates, and
    omitted_ratio_power(t) bounds the sum of truncated ratios raised to t.
    """

    children: tuple[tuple[int, SimilarityMap], ...]
    omitted: int | None = 0
    omitted_hull: tuple[float, float] | None = None
    omitted_ratio_power: Callable[[float], float] | None = None


@dataclass(frozen=True)
class RatioLaw:
    """Distribution of a single reduction ratio, bounded inside (0, 1)."""

    kind: str  # "uniform" or "fixed"
    lo: float
    hi: float

    def __post_init__(self):
        if self.kind not in ("uniform", "fixed"):
            raise ValueError(f"unknown ratio law kind {self.kind!r}")
        if not 0.0 < self.lo <= self.hi < 1.0:
            raise ValueError("ratio law support must lie inside (0, 1)")

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "fixed" or self.lo == self.hi

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.is_degenerate:
            return np.full(size, self.lo)
        return rng.uniform(self.lo, self.hi, size)


SpawnFn = Callable[
    [Mapping, Address, "NodeStream", int, float, float], OffspringDraw
]


@dataclass(frozen=True)
class ModelSpec:
    """A named construction model: how a node spawns, plus metadata.

    spawn(shared, address, stream, level, parent_diameter, eps_trunc)
    must be a pure function of its arguments.  For deterministic-ratio
    models ratio_sequence/ratio_count/tail_domination describe the fixed
    ratio series; for random finite models ratio_law, arity,
    sample_ratio_vector and place expose the raw i.i.d. draw so the
    fractal sampling semantics can enumerate the full tree.
    """

    name: str
    params: dict
    deterministic_ratios: bool
    self_similar: bool
    finite_branching: bool
    spawn: SpawnFn
    max_ratio: float
    level_dependent: bool = False
    arity: int | None = None
    draw_shared: Callable[[np.random.Generator], dict] | None = None
    sample_ratio_vector: Callable[[np.random.Generator], tuple[float, ...]] | None = None
    place: Callable[[Sequence[float]], tuple[SimilarityMap, ...]] | None = None
    ratio_sequence: Callable[[int], float] | None = None
    ratio_count: int | None = None
    tail_domination: tuple[float, float] | None = None
    ratio_law: RatioLaw | None = None


class NodeStream:
    """Lazy per-node RNG; the generator is only built if the model draws."""

    __slots__ = ("_seed", "_key", "_gen")

    def __init__(self, seed: int, key: tuple[int, ...]):
        self._seed = seed
        self._key = key
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self._seed, spawn_key=self._key)
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen


def node_stream(seed: int, address: Address) -> NodeStream:
    return NodeStream(seed, tuple(address))


def shared_stream(seed: int) -> NodeStream:
    return NodeStream(seed, _SHARED_KEY)


def derive_seed(seed: int, index: int) -> int:
    """Stable 64-bit sub-seed for replica index."""
    ss = np.random.SeedSequence(entropy=(seed, index))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Cell:
    """One alive node: its map from the unit interval, and spawn bookkeeping."""

    map: SimilarityMap
    alive: bool = True
    kept: int = 0
    omitted: int | None = 0
    omitted_hull: tuple[float, float] | None = None

    @property
    def diameter(self) -> float:
        return self.map.ratio

    @property
    def interval(self) -> tuple[float, float]:
        return self.map.interval()


@dataclass(frozen=True)
class LevelTruncation:
    kept: int
    truncated_nodes: int


@dataclass(frozen=True)
class RealizationStats:
    alive_per_level: tuple[int, ...]
    sup_diam_per_level: tuple[float, ...]
    truncation: tuple[LevelTruncation, ...]


@dataclass
class Realization:
    """A sampled, truncated construction tree.  Immutable after creation."""

    model: ModelSpec
    seed: int
    max_depth: int
    eps_trunc: float
    semantics: str
    shared: dict
    nodes: dict[Address, Cell]
    by_level: tuple[tuple[Address, ...], ...]
    extinct: bool
    _survivors: set[Address] | None = field(default=None, repr=False)

    def addresses_at(self, k: int) -> tuple[Address, ...]:
        if not 0 <= k <= self.max_depth:
            raise ValueError(f"level {k} beyond stored depth {self.max_depth}")
        return self.by_level[k]

    def survivors(self) -> set[Address]:
        """Addresses with an alive descendant at max_depth (inclusive)."""
        if self._survivors is None:
            surv: set[Address] = set(self.by_level[self.max_depth])
            for k in range(self.max_depth - 1, -1, -1):
                for addr in self.by_level[k + 1]:
                    if addr in surv:
                        surv.add(addr[:-1])
            self._survivors = surv
        return self._survivors

    def stats(self) -> RealizationStats:
        alive = tuple(len(level) for level in self.by_level)
        sup_diam = tuple(
            max((self.nodes[a].diameter for a in level), default=0.0)
            for level in self.by_level
        )
        trunc = []
        for level in self.by_level:
            kept = 0
            truncated = 0
            for a in level:
                cell = self.nodes[a]
                kept += cell.kept
                if cell.omitted is None or (cell.omitted or 0) > 0:
                    truncated += 1
            trunc.append(LevelTruncation(kept=kept, truncated_nodes=truncated))
        return RealizationStats(alive, sup_diam, tuple(trunc))


def _validate_sampling_args(max_depth: int, eps_trunc: float, semantics: str):
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    if not eps_trunc > 0.0:
        raise ValueError("eps_trunc must be positive")
    if semantics not in SEMANTICS:
        raise ValueError(f"semantics must be one of {SEMANTICS}")


def sample_realization(model: ModelSpec, seed: int, max_depth: int,
                       eps_trunc: float,
                       semantics: str = "recursive") -> Realization:
    """Deterministic function of all arguments.

    Under recursive semantics offspring are drawn only at alive nodes.
    Under fractal semantics an i.i.d. ratio draw is made at every address
    of the full tree up to max_depth and dead subtrees are discarded;
    this is only distinguishable for random finite-branching models, and
    for deterministic-ratio or infinite-branching models the two
    semantics coincide by construction.
    """
    _validate_sampling_args(max_depth, eps_trunc, semantics)
    shared = (model.draw_shared(shared_stream(seed).generator)
              if model.draw_shared else {})
    if (semantics == "fractal" and model.finite_branching
            and not model.deterministic_ratios):
        nodes, by_level = _build_fractal(model, seed, max_depth, eps_trunc, shared)
    else:
        nodes, by_level = _build_recursive(model, seed, max_depth, eps_trunc, shared)
    extinct = max_depth > 0 and not by_level[max_depth]
    return Realization(model=model, seed=seed, max_depth=max_depth,
                       eps_trunc=eps_trunc, semantics=semantics,
                       shared=shared, nodes=nodes, by_level=tuple(by_level),
                       extinct=extinct)


def _attach_children(nodes, parent_addr, parent_cell, draw):
    nodes[parent_addr] = replace(parent_cell, kept=len(draw.children),
                                 omitted=draw.omitted,
                                 omitted_hull=draw.omitted_hull)
    out = []
    for index, unit_map in draw.children:
        child = parent_addr + (index,)
        nodes[child] = Cell(map=parent_cell.map.compose(unit_map))
        out.append(child)
    return out


def _build_recursive(model, seed, max_depth, eps_trunc, shared):
    nodes: dict[Address, Cell] = {ROOT: Cell(map=SimilarityMap.identity())}
    by_level: list[tuple[Address, ...]] = [(ROOT,)]
    frontier: list[Address] = [ROOT]
    for level in range(max_depth):
        nxt: list[Address] = []
        for addr in frontier:
            cell = nodes[addr]
            draw = model.spawn(shared, addr, node_stream(seed, addr), level,
                               cell.diameter, eps_trunc)
            nxt.extend(_attach_children(nodes, addr, cell, draw))
        by_level.append(tuple(nxt))
        frontier = nxt
    return nodes, by_level


def _build_fractal(model, seed, max_depth, eps_trunc, shared):
    # draw the raw ratio vector at every address of the full arity-tree,
    # then realize top-down applying truncation; draws at alive addresses
    # match the recursive path because streams are keyed by address
    arity = model.arity
    if arity is None or model.sample_ratio_vector is None or model.place is None:
        raise ValueError("fractal enumeration needs a finite random model")
    draws: dict[Address, tuple[float, ...]] = {}
    level_addrs: list[list[Address]] = [[ROOT]]
    for k in range(max_depth):
        draws.update(
            (addr, model.sample_ratio_vector(node_stream(seed, addr).generator))
            for addr in level_addrs[k]
        )
        level_addrs.append([addr + (i,) for addr in level_addrs[k]
                            for i in range(1, arity + 1)])
    nodes: dict[Address, Cell] = {ROOT: Cell(map=SimilarityMap.identity())}
    by_level: list[tuple[Address, ...]] = [(ROOT,)]
    frontier: list[Address] = [ROOT]
    for _ in range(max_depth):
        nxt: list[Address] = []
        for addr in frontier:
            cell = nodes[addr]
            maps = model.place(draws[addr])
            draw = truncate_finite(maps, cell.diameter, eps_trunc)
            nxt.extend(_attach_children(nodes, addr, cell, draw))
        by_level.append(tuple(nxt))
        frontier = nxt
    return nodes, by_level


def truncate_finite(maps: Sequence[SimilarityMap], parent_diameter: float,
                    eps_trunc: float) -> OffspringDraw:
    """Drop offspring whose absolute diameter falls below eps_trunc."""
    kept = []
    omitted_ratios = []
    hull_lo, hull_hi = math.inf, -math.inf
    for i, m in enumerate(maps, 1):
        if m.ratio * parent_diameter >= eps_trunc:
            kept.append((i, m))
        else:
            omitted_ratios.append(m.ratio)
            lo, hi = m.interval()
            hull_lo, hull_hi = min(hull_lo, lo), max(hull_hi, hi)
    hull = (hull_lo, hull_hi) if omitted_ratios else None
    power = None
    if omitted_ratios:
        dropped = tuple(omitted_ratios)
        power = lambda t: sum(v ** t for v in dropped)
    return OffspringDraw(children=tuple(kept), omitted=len(omitted_ratios),
                         omitted_hull=hull, omitted_ratio_power=power)


def sample_surviving(model: ModelSpec, seed: int, max_depth: int,
                     eps_trunc: float, semantics: str = "recursive",
                     max_attempts: int = 1000) -> Realization:
    """Rejection-resample with sub-seeds (seed, attempt) until survival."""
    for attempt in range(max_attempts):
        rz = sample_realization(model, derive_seed(seed, attempt), max_depth,
                                eps_trunc, semantics)
        if not rz.extinct:
            return rz
    raise RuntimeError(
        f"no surviving realization in {max_attempts} attempts (model {model.name})")


def level_union(rz: Realization, k: int, survivors_only: bool = False) -> CompactSet:
    """Union of level-k cells, optionally restricted to cells that still
    have an alive descendant at max_depth (the computable stand-in for
    cells meeting the limit set)."""
    addrs = rz.addresses_at(k)
    if survivors_only:
        surv = rz.survivors()
        addrs = tuple(a for a in addrs if a in surv)
    return normalize([rz.nodes[a].interval for a in addrs])


@dataclass(frozen=True)
class OrbitResult:
    """Images of a reference point under the maps of a node family.

    dropped counts pruned branch stubs whose whole subtrees are missing
    (None when a node truncated an infinite offspring tail); for a level
    offset of 1 this is exactly the number of missing orbit points.
    dropped_hull spans the missing points in absolute coordinates.
    """

    points: CompactSet
    dropped: int | None
    dropped_hull: tuple[float, float] | None


def orbit(rz: Realization, base: Address, x: float,
          target) -> OrbitResult:
    """Orbit of x (in unit coordinates of the base cell) under the maps
    onto descendants of base, selected by a relative antichain or by a
    level offset."""
    if base not in rz.nodes:
        raise ValueError("empty cell has no orbit")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if isinstance(target, int):
        members, dropped, hull = _orbit_level_members(rz, base, target)
    else:
        rel = [tuple(t) for t in target]
        if not is_antichain(rel):
            raise ValueError("target addresses do not form an antichain")
        members = []
        missing = 0
        for sigma in rel:
            addr = base + sigma
            if addr in rz.nodes:
                members.append(addr)
            else:
                missing += 1
        dropped, hull = missing, None
    pts = from_points(rz.nodes[a].map.apply(x) for a in members)
    return OrbitResult(points=pts, dropped=dropped, dropped_hull=hull)


def _orbit_level_members(rz, base, offset):
    if offset < 0:
        raise ValueError("level offset must be >= 0")
    level = len(base) + offset
    if level > rz.max_depth:
        raise ValueError(f"level {level} beyond stored depth {rz.max_depth}")
    members = [a for a in rz.addresses_at(level) if a[:len(base)] == base]
    if level < rz.max_depth:
        surv = rz.survivors()
        members = [a for a in members if a in surv]
    dropped: int | None = 0
    hull_lo, hull_hi = math.inf, -math.inf
    for k in range(len(base), level):
        for addr in rz.addresses_at(k):
            if addr[:len(base)] != base:
                continue
            cell = rz.nodes[addr]
            if cell.omitted is None:
                dropped = None
            elif dropped is not None:
                dropped += cell.omitted
            if cell.omitted_hull is not None:
                lo = cell.map.apply(cell.omitted_hull[0])
                hi = cell.map.apply(cell.omitted_hull[1])
                lo, hi = min(lo, hi), max(lo, hi)
                hull_lo, hull_hi = min(hull_lo, lo), max(hull_hi, hi)
    hull = (hull_lo, hull_hi) if hull_hi >= hull_lo else None
    return members, dropped, hull


def stopping_set(rz: Realization, base: Address, q: int,
                 shrink: float) -> frozenset[Address]:
    """Antichain of first descendants of base whose diameter drops below
    shrink * diam(base), where depth base+q members qualify regardless of
    their parent's diameter.

    Branches pruned by truncation are already below eps_trunc, hence
    below the threshold; they contribute no resolvable members.
    """
    if base not in rz.nodes:
        raise ValueError("base cell is not alive")
    if q < 1:
        raise ValueError("q must be >= 1")
    if not 0.0 < shrink <= 1.0:
        raise ValueError("shrink must lie in (0, 1]")
    threshold = shrink * rz.nodes[base].diameter
    members: list[Address] = []
    unresolved: list[Address] = []
    stack = [base]
    while stack:
        addr = stack.pop()
        rel_depth = len(addr) - len(base)
        cell = rz.nodes[addr]
        if rel_depth >= q and cell.diameter < threshold:
            members.append(addr)
            continue
        if len(addr) == rz.max_depth:
            if cell.diameter >= threshold:
                unresolved.append(addr)
            continue
        stack.extend(addr + (i,) for i in _child_indices(rz, addr))
    if unresolved:
        raise ValueError(
            "realization too shallow to resolve the stopping set; "
            f"unresolved addresses: {sorted(unresolved)}")
    result = frozenset(members)
    assert is_antichain(result)
    return result


def _child_indices(rz, addr):
    # children carry their offspring law index as the last digit
    k = len(addr)
    if k + 1 > rz.max_depth:
        return []
    return [a[-1] for a in rz.addresses_at(k + 1) if a[:k] == addr]


@dataclass(frozen=True)
class OscReport:
    ok: bool
    worst_overlap: float


def validate_osc(rz: Realization, k: int, tol: float = 1e-12) -> OscReport:
    """Check that level-k cells have pairwise disjoint interiors."""
    ivs = sorted(rz.nodes[a].interval for a in rz.addresses_at(k))
    worst = 0.0
    for (_, hi1), (lo2, _) in zip(ivs, ivs[1:]):
        worst = max(worst, hi1 - lo2)
    return OscReport(ok=worst <= tol, worst_overlap=worst)


def neighborhood_bound_probe(rz: Realization, k: int, z: float, r: float) -> int:
    """Number of level-k cells meeting the closed ball B(z, r) whose
    diameter is at least r/2."""
    if not r > 0:
        raise ValueError("r must be positive")
    lo, hi = z - r, z + r
    floor = r / 2.0
    count = 0
    for addr in rz.addresses_at(k):
        cell = rz.nodes[addr]
        a, b = cell.interval
        if b >= lo and a <= hi and cell.diameter >= floor:
            count += 1
    return count


def _statistic_value(rz: Realization, statistic: str, level: int) -> float:
    if statistic == "count":
        return float(len(rz.addresses_at(level)))
    if statistic == "diameter_sum":
        return float(sum(rz.nodes[a].diameter for a in rz.addresses_at(level)))
    raise ValueError(f"unknown statistic {statistic!r}")


def sampler_statistic_distribution(model: ModelSpec, semantics: str,
                                   statistic: str, replicas: int, seed: int,
                                   *, level: int,
                                   max_depth: int | None = None,
                                   eps_trunc: float = 1e-12) -> list[float]:
    """Empirical sample of a per-realization statistic, one value per
    replica, ordered by replica index; replica i uses sub-seed (seed, i)."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    depth = level if max_depth is None else max_depth
    out = []
    for i in range(replicas):
        rz = sample_realization(model, derive_seed(seed, i), depth,
                                eps_trunc, semantics)
        out.append(_statistic_value(rz, statistic, level))
    return out


def realization_export(rz: Realization) -> dict:
    """JSON-ready structure: model identity, tree nodes, and stats."""
    stats = rz.stats()
    return {
        "model": rz.model.name,
        "params": dict(rz.model.params),
        "seed": rz.seed,
        "depth": rz.max_depth,
        "eps_trunc": rz.eps_trunc,
        "semantics": rz.semantics,
        "extinct": rz.extinct,
        "nodes": [
            {
                "address": list(addr),
                "left": rz.nodes[addr].interval[0],
                "right": rz.nodes[addr].interval[1],
                "alive": rz.nodes[addr].alive,
            }
            for level in rz.by_level for addr in sorted(level)
        ],
        "stats": {
            "alive_per_level": list(stats.alive_per_level),
            "sup_diam_per_level": list(stats.sup_diam_per_level),
            "kept_per_level": [t.kept for t in stats.truncation],
            "truncated_nodes_per_level": [t.truncated_nodes for t in stats.truncation],
        },
    }

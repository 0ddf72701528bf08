"""Realization sampling, level unions, orbits, stopping sets, validators."""

import math

import numpy as np
import pytest

from fractalkit.construction import (
    Cell,
    RatioLaw,
    Realization,
    SimilarityMap,
    derive_seed,
    level_union,
    neighborhood_bound_probe,
    orbit,
    realization_export,
    sample_realization,
    sample_surviving,
    sampler_statistic_distribution,
    stopping_set,
    validate_osc,
)
from fractalkit.geometry import hausdorff_distance
from fractalkit.models import cantor, example1, example2, homogeneous_random, vn_example1


# ------------------------------------------------------------- similarity

def test_similarity_map_basics():
    s = SimilarityMap(ratio=0.5, offset=0.25)
    assert s.apply(0.0) == 0.25 and s.apply(1.0) == 0.75
    assert s.interval() == (0.25, 0.75)


def test_similarity_map_orientation():
    s = SimilarityMap(ratio=0.5, offset=0.75, orientation=-1)
    assert s.interval() == (0.25, 0.75)
    assert s.apply(0.0) == 0.75 and s.apply(1.0) == 0.25


def test_similarity_compose_is_similar():
    outer = SimilarityMap(ratio=1 / 3, offset=2 / 3)
    inner = SimilarityMap(ratio=1 / 2, offset=0.5, orientation=-1)
    comp = outer.compose(inner)
    for x in (0.0, 0.3, 1.0):
        assert comp.apply(x) == pytest.approx(outer.apply(inner.apply(x)), abs=1e-15)
    assert comp.ratio == pytest.approx(outer.ratio * inner.ratio)


def test_similarity_map_validation():
    with pytest.raises(ValueError):
        SimilarityMap(ratio=0.0, offset=0.5)
    with pytest.raises(ValueError):
        SimilarityMap(ratio=0.5, offset=0.9)


# --------------------------------------------------------------- sampling

def test_cantor_realization_closed_form():
    rz = sample_realization(cantor(1 / 3), 7, 3, 1e-9)
    assert len(rz.addresses_at(3)) == 8
    for addr in rz.addresses_at(3):
        assert rz.nodes[addr].diameter == pytest.approx(1 / 27, rel=1e-12)
    assert rz.nodes[()].diameter == 1.0
    assert not rz.extinct


def test_child_diameter_is_ratio_times_parent():
    rz = sample_realization(homogeneous_random(RatioLaw("uniform", 0.2, 0.3)), 3, 4, 1e-12)
    for addr, cell in rz.nodes.items():
        if addr == ():
            continue
        parent = rz.nodes[addr[:-1]]
        ratio = cell.diameter / parent.diameter
        assert 0.2 - 1e-12 <= ratio <= 0.3 + 1e-12
        lo, hi = cell.interval
        plo, phi = parent.interval
        assert plo - 1e-12 <= lo and hi <= phi + 1e-12


def test_example1_level_one_matches_paper_layout():
    rz = sample_realization(example1(p=1.0), 3, 1, 1e-7)
    addrs = sorted(rz.addresses_at(1))
    assert addrs == [(1,), (2,), (3,), (4,)]  # N(1e-7) = 4
    for n, addr in enumerate(addrs, 1):
        lo, hi = rz.nodes[addr].interval
        assert hi == pytest.approx(1 / n, abs=1e-15)
        assert rz.nodes[addr].diameter == pytest.approx(vn_example1(n), rel=1e-12)


def test_determinism_bit_identical():
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.3))
    a = sample_realization(m, 99, 4, 1e-9)
    b = sample_realization(m, 99, 4, 1e-9)
    assert a.nodes == b.nodes
    assert realization_export(a) == realization_export(b)


def test_different_seeds_differ():
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.3))
    a = sample_realization(m, 1, 3, 1e-9)
    b = sample_realization(m, 2, 3, 1e-9)
    assert a.nodes != b.nodes


def test_recursive_vs_fractal_identical_for_deterministic_model():
    a = sample_realization(cantor(0.4), 5, 4, 1e-9, "recursive")
    b = sample_realization(cantor(0.4), 5, 4, 1e-9, "fractal")
    assert a.nodes == b.nodes


def test_recursive_vs_fractal_identical_paired_noise():
    # same per-address streams: the alive trees coincide even with extinction
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.3))
    for seed in range(5):
        a = sample_realization(m, seed, 3, 0.06, "recursive")
        b = sample_realization(m, seed, 3, 0.06, "fractal")
        assert a.nodes == b.nodes


def test_extinction_flagged_not_error():
    rz = sample_realization(cantor(1 / 3), 0, 2, 0.9)
    assert rz.extinct
    assert len(rz.addresses_at(1)) == 0
    assert rz.stats().alive_per_level == (1, 0, 0)


def test_sample_surviving_resamples():
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.3))
    rz = sample_surviving(m, 3, 2, 0.06)
    assert not rz.extinct


def test_validation_errors():
    with pytest.raises(ValueError):
        sample_realization(cantor(1 / 3), 0, -1, 1e-9)
    with pytest.raises(ValueError):
        sample_realization(cantor(1 / 3), 0, 2, 0.0)
    with pytest.raises(ValueError):
        sample_realization(cantor(1 / 3), 0, 2, 1e-9, "bogus")


def test_depth_zero_root_only():
    rz = sample_realization(cantor(1 / 3), 0, 0, 1e-9)
    assert list(rz.nodes) == [()]
    assert not rz.extinct


# ------------------------------------------------------------ level union

def test_level_union_cantor():
    rz = sample_realization(cantor(1 / 3), 0, 3, 1e-9)
    u1 = level_union(rz, 1)
    assert len(u1.intervals) == 2
    assert u1.intervals[0] == pytest.approx((0.0, 1 / 3), abs=1e-15)
    assert u1.intervals[1] == pytest.approx((2 / 3, 1.0), abs=1e-15)
    assert level_union(rz, 0).intervals == ((0.0, 1.0),)


def test_level_union_nesting():
    # containment up to float dust from composing similarity maps
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.3), 2)
    rz = sample_realization(m, 11, 5, 1e-12)
    for k in range(rz.max_depth):
        outer = level_union(rz, k)
        inner = level_union(rz, k + 1)
        for a, b in inner.intervals:
            assert outer.distance_to(a) <= 1e-12
            assert outer.distance_to(b) <= 1e-12


def test_level_union_depth_error():
    rz = sample_realization(cantor(1 / 3), 0, 2, 1e-9)
    with pytest.raises(ValueError):
        level_union(rz, 3)


def test_level_union_survivors_only():
    # kill one subtree via truncation asymmetry: uniform law with a wide
    # range so some children die at depth 2 but not all
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.45), 2)
    rz = sample_surviving(m, 21, 3, 0.05)
    full = level_union(rz, 1, survivors_only=False)
    surv = level_union(rz, 1, survivors_only=True)
    for a, b in surv.intervals:
        assert a in full and b in full


def test_diameter_decay_and_level_union_convergence():
    for model, seed in ((cantor(1 / 3), 0),
                        (homogeneous_random(RatioLaw("uniform", 0.2, 0.3)), 1),
                        (example1(p=1.5), 2)):
        depth = 7 if model.finite_branching else 4
        rz = sample_realization(model, seed, depth, 1e-12)
        stats = rz.stats()
        sup = stats.sup_diam_per_level
        assert all(s2 <= s1 for s1, s2 in zip(sup, sup[1:]))
        # decay bound: below 1e-3 by the ratio-driven depth
        d_needed = math.ceil(math.log(1e-3) / math.log(model.max_ratio))
        if d_needed <= depth:
            assert sup[d_needed] < 1e-3
        deep = level_union(rz, rz.max_depth, survivors_only=True)
        for k in range(rz.max_depth + 1):
            uk = level_union(rz, k, survivors_only=True)
            d = hausdorff_distance(uk, deep)
            assert d <= sup[k] + sup[rz.max_depth] + 1e-12


# ------------------------------------------------------------------ orbit

def test_orbit_level_offset_zero_is_identity():
    rz = sample_realization(cantor(1 / 3), 0, 2, 1e-9)
    res = orbit(rz, (), 0.37, 0)
    assert res.points.intervals == ((0.37, 0.37),)


def test_orbit_cantor_left_endpoints():
    rz = sample_realization(cantor(1 / 3), 0, 2, 1e-9)
    res = orbit(rz, (), 0.0, 2)
    got = [a for a, _ in res.points.intervals]
    assert got == pytest.approx([0.0, 2 / 9, 2 / 3, 8 / 9])
    assert res.dropped == 0


def test_orbit_example1_right_endpoints():
    rz = sample_realization(example1(p=1.0), 3, 1, 1e-7)
    res = orbit(rz, (), 1.0, 1)
    got = sorted(a for a, _ in res.points.intervals)
    assert got == pytest.approx(sorted([1.0, 0.5, 1 / 3, 0.25]))
    assert res.dropped is None  # infinite truncated tail
    assert res.dropped_hull[0] == 0.0
    assert res.dropped_hull[1] == pytest.approx(0.2)


def test_orbit_antichain_target():
    rz = sample_realization(cantor(1 / 3), 0, 3, 1e-9)
    res = orbit(rz, (), 0.0, [(1, 1), (1, 2), (2,)])
    assert [a for a, _ in res.points.intervals] == pytest.approx([0.0, 2 / 9, 2 / 3])
    with pytest.raises(ValueError, match="antichain"):
        orbit(rz, (), 0.0, [(1,), (1, 2)])


def test_orbit_dead_base_error():
    rz = sample_realization(cantor(1 / 3), 0, 2, 1e-9)
    with pytest.raises(ValueError, match="empty cell has no orbit"):
        orbit(rz, (7, 7), 0.5, 1)


def test_orbit_relative_to_base_cell():
    rz = sample_realization(cantor(1 / 3), 0, 3, 1e-9)
    res = orbit(rz, (2,), 0.0, 1)
    assert [a for a, _ in res.points.intervals] == pytest.approx([2 / 3, 8 / 9])


# ----------------------------------------------------------- stopping set

def test_stopping_set_cantor_closed_form():
    rz = sample_realization(cantor(1 / 3), 0, 3, 1e-9)
    got = stopping_set(rz, (), 1, 1 / 5)
    assert sorted(got) == sorted(rz.addresses_at(2))


def test_stopping_set_shrink_one_is_next_level():
    rz = sample_realization(cantor(1 / 3), 0, 3, 1e-9)
    got = stopping_set(rz, (), 1, 1.0)
    assert sorted(got) == sorted(rz.addresses_at(1))


def test_stopping_set_too_shallow():
    rz = sample_realization(cantor(1 / 3), 0, 1, 1e-9)
    with pytest.raises(ValueError, match="too shallow"):
        stopping_set(rz, (), 1, 1 / 5)


def test_stopping_set_deep_crossings():
    # mixed ratios: crossing depth varies per branch
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.45), 2)
    rz = sample_realization(m, 5, 6, 1e-12)
    got = stopping_set(rz, (), 2, 1 / 5)
    thr = 1 / 5
    for addr in got:
        assert len(addr) >= 2
        assert rz.nodes[addr].diameter < thr
        if len(addr) > 2:
            assert rz.nodes[addr[:-1]].diameter >= thr


# ------------------------------------------------------------- validators

def test_validate_osc_ok_for_cantor():
    rz = sample_realization(cantor(1 / 3), 0, 4, 1e-9)
    for k in range(5):
        assert validate_osc(rz, k).ok


def test_validate_osc_example1_level1():
    rz = sample_realization(example1(p=1.3), 9, 1, 1e-12)
    rep = validate_osc(rz, 1)
    assert rep.ok and rep.worst_overlap <= 0.0


def test_validate_osc_negative_control():
    rz = sample_realization(cantor(1 / 3), 0, 1, 1e-9)
    bad = dict(rz.nodes)
    bad[(2,)] = Cell(map=SimilarityMap(ratio=0.4, offset=0.2))
    corrupted = Realization(model=rz.model, seed=rz.seed, max_depth=1,
                            eps_trunc=rz.eps_trunc, semantics=rz.semantics,
                            shared={}, nodes=bad, by_level=rz.by_level,
                            extinct=False)
    rep = validate_osc(corrupted, 1)
    assert not rep.ok and rep.worst_overlap > 0


def test_probe_cantor_examples():
    rz = sample_realization(cantor(1 / 3), 0, 1, 1e-9)
    assert neighborhood_bound_probe(rz, 1, 0.5, 0.1) == 0
    # window covering J counts only cells with diameter >= r/2
    assert neighborhood_bound_probe(rz, 1, 0.5, 0.5) == 2
    assert neighborhood_bound_probe(rz, 1, 0.5, 2.5) == 0  # 1/3 < 1.25


def test_probe_randomized_bound():
    rng = np.random.default_rng(17)
    models = [cantor(1 / 3), homogeneous_random(RatioLaw("uniform", 0.2, 0.3)),
              example1(p=1.0)]
    for model in models:
        depth = 4 if model.finite_branching else 2
        rz = sample_realization(model, 13, depth, 1e-12)
        for _ in range(500):
            z = float(rng.uniform(0, 1))
            r = float(rng.uniform(1e-4, 2.0))
            k = int(rng.integers(1, depth + 1))
            assert neighborhood_bound_probe(rz, k, z, r) <= 6


# ---------------------------------------------------------- replica stats

def test_sampler_statistic_deterministic_and_ordered():
    m = homogeneous_random(RatioLaw("uniform", 0.2, 0.3))
    a = sampler_statistic_distribution(m, "recursive", "count", 10, 5, level=2,
                                       eps_trunc=0.06)
    b = sampler_statistic_distribution(m, "recursive", "count", 10, 5, level=2,
                                       eps_trunc=0.06)
    assert a == b
    single = sampler_statistic_distribution(m, "recursive", "count", 1, 5,
                                            level=2, eps_trunc=0.06)
    assert single == a[:1]


def test_sampler_statistic_deterministic_model_constant():
    m = cantor(1 / 3)
    for sem in ("recursive", "fractal"):
        vals = sampler_statistic_distribution(m, sem, "count", 5, 1, level=2)
        assert vals == [4.0] * 5
    sums = sampler_statistic_distribution(m, "recursive", "diameter_sum", 3, 1,
                                          level=2)
    assert sums == pytest.approx([4 / 9] * 3)


def test_derive_seed_stable():
    assert derive_seed(5, 0) == derive_seed(5, 0)
    assert derive_seed(5, 0) != derive_seed(5, 1)


# ----------------------------------------------------------------- export

def test_realization_export_schema():
    rz = sample_realization(cantor(1 / 3), 4, 2, 1e-9)
    doc = realization_export(rz)
    assert set(doc) == {"model", "params", "seed", "depth", "eps_trunc",
                        "semantics", "extinct", "nodes", "stats"}
    assert doc["nodes"][0] == {"address": [], "left": 0.0, "right": 1.0,
                               "alive": True}
    assert doc["stats"]["alive_per_level"] == [1, 2, 4]
    assert all(set(nd) == {"address", "left", "right", "alive"}
               for nd in doc["nodes"])

"""Acceptance checks: each criterion runs at its stated tolerance and
reports one pass/fail line.  The quick suite shrinks trial counts for a
sub-minute smoke run; the full suite uses the criterion counts.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp

from .construction import (
    ROOT,
    RatioLaw,
    derive_seed,
    level_union,
    neighborhood_bound_probe,
    orbit,
    sample_realization,
)
from .dimension import (
    antichain_moment_test,
    covering_rows,
    curve_for_model,
    estimate_box_dimension,
    estimate_orbit_dimension,
    estimate_set_dimension,
    eval_mink,
    eval_packsim,
    expected_sum_ratios,
    finite_coincidence_check,
    make_scale_grid,
    solve_alpha,
    _dropped_ball_impact,
)
from .geometry import (
    count_table,
    covering_number,
    from_points,
    hausdorff_distance,
    normalize,
    packing_number,
)
from .models import (
    cantor,
    example1,
    example2,
    example2_deep,
    homogeneous_random,
    orbit_set,
)

LOG23 = math.log(2.0) / math.log(3.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float


def _result(name, passed, detail, t0) -> CheckResult:
    return CheckResult(name=name, passed=passed, detail=detail,
                       elapsed=time.perf_counter() - t0)


def _random_compact(rng, max_intervals=8):
    grid = 2.0 ** -12
    k = int(rng.integers(1, max_intervals + 1))
    out = []
    for _ in range(k):
        a = int(rng.integers(0, 4097))
        b = a if rng.random() < 0.3 else min(4096, a + int(rng.integers(1, 400)))
        out.append((a * grid, b * grid))
    return normalize(out)


def _random_scale(rng, lo_units=4, hi_units=2048):
    return int(rng.integers(lo_units, hi_units + 1)) * 2.0 ** -12


def check_alpha_exactness(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    sol = solve_alpha(curve_for_model(cantor(1 / 3, 2)))
    err = abs(sol.alpha - LOG23)
    elapsed = time.perf_counter() - t0
    passed = err <= 1e-9 and elapsed < 1.0
    return _result("01 alpha solver exactness (cantor 1/3)", passed,
                   f"|alpha - log2/log3| = {err:.2e} (tol 1e-9), {elapsed:.3f}s",
                   t0)


def check_orbit_set_dimension(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    grid = make_scale_grid(1e-2, 1e-6, 4)
    details = []
    ok = True
    for p in (1.0, 2.0, 3.0):
        t1 = time.perf_counter()
        est = estimate_set_dimension(orbit_set(p, 1e-7), grid)
        dt = time.perf_counter() - t1
        err = abs(est.slope - 1.0 / (p + 1.0))
        ok &= err <= 0.03 and dt < 10.0
        details.append(f"p={p:g}: slope={est.slope:.4f} err={err:.4f}")
    return _result("02 orbit-set dimension 1/(p+1) (tol 0.03)", ok,
                   "; ".join(details), t0)


def _union_dimension_with_impact_window(rz, level, scales, frac=0.1):
    # the root's truncated offspring tail biases counts at fine scales;
    # keep rows where the missing hull's ball impact stays small
    u = level_union(rz, level, survivors_only=True)
    root = rz.nodes[ROOT]
    rows = covering_rows(count_table(u, scales))
    kept = [(r, c) for r, c in rows
            if _dropped_ball_impact(root.omitted_hull, root.omitted, r)
            <= max(1.0, frac * c)]
    return estimate_box_dimension(kept, min_count=10,
                                  max_count=0.5 * u.n_intervals)


def check_example1(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    curve = curve_for_model(example1())
    sol = solve_alpha(curve)
    at_quarter = expected_sum_ratios(curve, 0.25)
    ok = sol.alpha < 0.25 and at_quarter.hi < 1.0
    details = [f"alpha={sol.alpha:.4f} (<0.25), sum V^0.25 <= {at_quarter.hi:.4f}"]
    grid = make_scale_grid(1e-1, 1e-6, 8)
    union_grid = make_scale_grid(1e-1, 1e-5, 8)
    for p in (1.0, 1.5, 2.0):
        target = 1.0 / (p + 1.0)
        rz1 = sample_realization(example1(p=p), derive_seed(seed, 1), 1, 1e-300)
        gamma = estimate_orbit_dimension(rz1, ROOT, 1.0, grid).slope
        mink = eval_mink(sol.alpha, gamma)
        err_mink = abs(mink - target)
        rz3 = sample_realization(example1(p=p), derive_seed(seed, 3), 3, 1e-150)
        union_est = _union_dimension_with_impact_window(rz3, 3, union_grid)
        err_union = abs(union_est.slope - target)
        ok &= err_mink <= 0.05 and err_union <= 0.08
        details.append(f"p={p:g}: mink={mink:.3f} (err {err_mink:.3f}), "
                       f"union={union_est.slope:.3f} (err {err_union:.3f})")
    return _result("03 example1: alpha<1/4, mink +-0.05, depth-3 union +-0.08",
                   ok, "; ".join(details), t0)


def check_example2(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    curve = curve_for_model(example2())
    eighth = expected_sum_ratios(curve, 0.125)
    sol = solve_alpha(curve)
    ok = eighth.hi < 1.0 and sol.alpha < 0.125
    # deep-level orbit: a level-1 cell of example2 spawns the self-similar
    # 1/n^4 law; scales are relative to that cell's diameter
    rz = sample_realization(example2(), derive_seed(seed, 2), 2, 1e-300)
    base = (1,)
    l_base = rz.nodes[base].diameter
    scales = [s * l_base for s in make_scale_grid(1e-1, 1e-8, 8)]
    deep = estimate_orbit_dimension(rz, base, 1.0, scales).slope
    pack = eval_packsim(sol.alpha, deep, example2_deep().self_similar)
    err_deep = abs(deep - 0.2)
    ok &= err_deep <= 0.03 and pack is not None and abs(pack - 0.2) <= 0.03
    samples = 10 if quick else 50
    grid1 = make_scale_grid(1e-1, 1e-7, 8)
    minks = []
    for i in range(samples):
        rzi = sample_realization(example2(), derive_seed(seed, 100 + i), 1, 1e-300)
        g = estimate_orbit_dimension(rzi, ROOT, 1.0, grid1).slope
        minks.append(eval_mink(sol.alpha, g))
    err_min = abs(min(minks) - 1.0 / 3.0)
    ok &= err_min <= 0.04
    return _result("04 example2: sum V^1/8 < 1, deep orbit 1/5, ess-inf 1/3",
                   ok,
                   f"sum={eighth.hi:.4f}, deep={deep:.4f} (err {err_deep:.4f}), "
                   f"packsim={pack:.4f}, min mink over {samples} p: "
                   f"{min(minks):.4f} (err {err_min:.4f})", t0)


def check_sandwich(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    trials = 200 if quick else 1000
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(trials):
        k = _random_compact(rng)
        r = _random_scale(rng)
        if not (covering_number(k, 2 * r) <= packing_number(k, r)
                <= covering_number(k, r / 2)):
            violations += 1
    return _result("05 sandwich N_2r <= P_r <= N_r/2", violations == 0,
                   f"{trials} trials, {violations} violations", t0)


def check_greedy_vs_bruteforce(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    from .reference import exhaustive_covering, exhaustive_packing

    trials = 100 if quick else 500
    rng = np.random.default_rng(seed + 1)
    mismatches = 0
    for _ in range(trials):
        k = _random_compact(rng)
        r = _random_scale(rng, lo_units=64)
        if covering_number(k, r) != exhaustive_covering(k, r):
            mismatches += 1
        if packing_number(k, r) != exhaustive_packing(k, r):
            mismatches += 1
    return _result("06 greedy equals exhaustive search", mismatches == 0,
                   f"{trials} sets, {mismatches} mismatches", t0)


def check_metric_axioms(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    trials = 200 if quick else 1000
    rng = np.random.default_rng(seed + 2)
    violations = 0
    for _ in range(trials):
        a, b, c = (_random_compact(rng) for _ in range(3))
        dab = hausdorff_distance(a, b)
        if dab != hausdorff_distance(b, a):
            violations += 1
        if (dab == 0.0) != (a == b):
            violations += 1
        if dab > hausdorff_distance(a, c) + hausdorff_distance(c, b) + 1e-12:
            violations += 1
        parts = [_random_compact(rng, 3) for _ in range(6)]
        total = parts[0]
        for p in parts[1:]:
            total = total.union(p)
        running = parts[0]
        reached = hausdorff_distance(running, total) < 1e-6
        for p in parts[1:]:
            running = running.union(p)
            reached |= hausdorff_distance(running, total) < 1e-6
        if not reached:
            violations += 1
    return _result("07 metric axioms and partial-union convergence",
                   violations == 0, f"{trials} trials, {violations} violations",
                   t0)


def _builtin_models():
    return [
        ("cantor(1/3,2)", cantor(1 / 3, 2), 7, 1e-12),
        ("cantor(1/4,3)", cantor(0.25, 3), 6, 1e-12),
        ("homogeneous(U[0.2,0.3],2)",
         homogeneous_random(RatioLaw("uniform", 0.2, 0.3), 2), 7, 1e-12),
        ("example1", example1(), 3, 1e-12),
        ("example2", example2(), 3, 1e-12),
        ("example2_deep", example2_deep(), 3, 1e-12),
    ]


def check_level_union_convergence(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    seeds = 5 if quick else 20
    violations = 0
    checked = 0
    for name, model, depth, eps in _builtin_models():
        for i in range(seeds):
            rz = sample_realization(model, derive_seed(seed, i), depth, eps)
            sup = rz.stats().sup_diam_per_level
            deep = level_union(rz, rz.max_depth, survivors_only=True)
            for k in range(rz.max_depth + 1):
                uk = level_union(rz, k, survivors_only=True)
                d = hausdorff_distance(uk, deep)
                checked += 1
                if d > sup[k] + sup[rz.max_depth] + 1e-12:
                    violations += 1
    return _result("08 level-union convergence bound", violations == 0,
                   f"{checked} (model, seed, level) cases, {violations} violations",
                   t0)


def check_antichain_bound(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    replicas = 500 if quick else 10_000
    cells = []
    ok = True
    matrix = [
        (cantor(1 / 3, 2), 0.7),
        (homogeneous_random(RatioLaw("uniform", 0.2, 0.3), 2), 0.7),
        (example1(), 0.25),
    ]
    for model, t in matrix:
        for q in (1, 2, 3):
            rep = antichain_moment_test(model, t, q, replicas, seed + q)
            ok &= rep.passed
            cells.append(f"{model.name} q={q}: mean={rep.empirical_mean:.3f} "
                         f"<= {rep.bound:.3f}")
    return _result("09 antichain moment bound p^q/(1-p)", ok,
                   "; ".join(cells), t0)


def check_sampler_equivalence(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    reps = 500 if quick else 2000
    model = homogeneous_random(RatioLaw("uniform", 0.2, 0.3), 2)
    from .parallel import statistic_sample
    a = statistic_sample("homogeneous", {"lo": 0.2, "hi": 0.3}, "recursive",
                         "count", reps, seed, level=2, eps_trunc=0.06)
    b = statistic_sample("homogeneous", {"lo": 0.2, "hi": 0.3}, "fractal",
                         "count", reps, seed, level=2, eps_trunc=0.06)
    stat = float(ks_2samp(a, b).statistic)
    crit = 1.6276 * math.sqrt((reps + reps) / (reps * reps))
    return _result("10 sampler-semantics equivalence (KS, 1% level)",
                   stat < crit, f"KS={stat:.4f} < {crit:.4f} "
                   f"({reps} replicas per semantics)", t0)


def check_finite_coincidence(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    seeds = 5 if quick else 20
    grid = make_scale_grid(1e-1, 3e-6, 8)
    details = []
    ok = True
    for model in (cantor(1 / 3, 2),
                  homogeneous_random(RatioLaw("uniform", 0.2, 0.3), 2)):
        slopes = []
        alpha = None
        for i in range(seeds):
            rep = finite_coincidence_check(model, derive_seed(seed, i), 12,
                                           grid, curve_seed=seed)
            slopes.append(rep.estimate.slope)
            alpha = rep.alpha.alpha
        mean_slope = float(np.mean(slopes))
        err = abs(mean_slope - alpha)
        ok &= err <= 0.05
        details.append(f"{model.name}: slope={mean_slope:.4f} vs "
                       f"alpha={alpha:.4f} (err {err:.4f})")
    return _result("11 finite-branching coincidence (tol 0.05, mean over seeds)",
                   ok, "; ".join(details), t0)


def check_neighborhood_probe(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    probes = 2000 if quick else 10_000
    rng = np.random.default_rng(seed + 3)
    models = [(cantor(1 / 3, 2), 4), (cantor(0.25, 3), 4),
              (homogeneous_random(RatioLaw("uniform", 0.2, 0.3), 2), 4),
              (example1(), 2), (example2(), 2)]
    realizations = [
        sample_realization(m, derive_seed(seed, j), depth, 1e-12)
        for j, (m, depth) in enumerate(models)
    ]
    worst = 0
    for _ in range(probes):
        rz = realizations[int(rng.integers(0, len(realizations)))]
        k = int(rng.integers(1, rz.max_depth + 1))
        z = float(rng.uniform(0.0, 1.0))
        r = float(rng.uniform(1e-4, 2.0))
        worst = max(worst, neighborhood_bound_probe(rz, k, z, r))
    return _result("12 neighborhood probe bounded by 6", worst <= 6,
                   f"{probes} probes, max count {worst}", t0)


def check_cli_determinism(seed, quick) -> CheckResult:
    t0 = time.perf_counter()
    import json as _json
    import tempfile
    from pathlib import Path

    def run(args):
        proc = subprocess.run([sys.executable, "-m", "fractalkit.cli", *args],
                              capture_output=True, text=True)
        return proc.returncode, proc.stdout

    commands = [
        ["solve-alpha", "--model", "cantor", "--ratio", "0.3333333333",
         "--arity", "2"],
        ["boxdim", "--model", "orbit_set", "--p", "2", "--cutoff", "1e-6",
         "--rmin", "1e-5", "--rmax", "1e-2", "--seed", str(seed)],
        ["generate", "--model", "example1", "--p", "1.5", "--depth", "2",
         "--eps", "1e-9", "--seed", str(seed)],
    ]
    ok = True
    notes = []
    for cmd in commands:
        rc1, out1 = run(cmd)
        rc2, out2 = run(cmd)
        same = rc1 == rc2 == 0 and out1 == out2
        ok &= same
        notes.append(f"{cmd[0]}: {'identical' if same else 'MISMATCH'}")
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "exp.json"
        cfg.write_text(_json.dumps({
            "task": "sampler-stats", "model": "homogeneous",
            "params": {"lo": 0.2, "hi": 0.3}, "seed": seed, "level": 2,
            "eps_trunc": 0.06, "replicas": 64, "semantics": "recursive",
        }))
        rc1, out1 = run(["experiment", "--config", str(cfg), "--threads", "1"])
        rc2, out2 = run(["experiment", "--config", str(cfg), "--threads", "2"])
        same = rc1 == rc2 == 0 and out1 == out2
        ok &= same
        notes.append(f"threads 1 vs 2: {'identical' if same else 'MISMATCH'}")
    return _result("13 CLI determinism and thread-count invariance", ok,
                   "; ".join(notes), t0)


CHECKS = [
    check_alpha_exactness,
    check_orbit_set_dimension,
    check_example1,
    check_example2,
    check_sandwich,
    check_greedy_vs_bruteforce,
    check_metric_axioms,
    check_level_union_convergence,
    check_antichain_bound,
    check_sampler_equivalence,
    check_finite_coincidence,
    check_neighborhood_probe,
    check_cli_determinism,
]


def run_suite(suite: str = "quick", seed: int = 7,
              threads: int = 1) -> list[CheckResult]:
    if suite not in ("quick", "full"):
        raise ValueError("suite must be 'quick' or 'full'")
    quick = suite == "quick"
    return [check(seed, quick) for check in CHECKS]


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"[{status}] {r.name} ({r.elapsed:.2f}s): {r.detail}")
    failed = [r.name for r in results if not r.passed]
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        lines.append("failed: " + ", ".join(failed))
    return "\n".join(lines) + "\n"

"""Dimension machinery: the expectation equation for the Hausdorff
exponent, log-log regression estimates of Minkowski dimensions, orbit
dimensions, the antichain moment bound, and the closed-form theorem
evaluators."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import linregress

from .addressing import Address, ROOT
from .construction import (
    ModelSpec,
    Realization,
    derive_seed,
    level_union,
    orbit,
    sample_realization,
    stopping_set,
)
from .geometry import CompactSet, count_table

_BRACKET = (1e-6, 1.0)
_Z99 = 2.5758293035489004  # two-sided 99% normal quantile


@dataclass(frozen=True)
class CurveValue:
    """An evaluation of E[sum of ratios^beta] with a certified enclosure."""

    value: float
    lo: float
    hi: float

    @property
    def half_width(self) -> float:
        return max(self.hi - self.value, self.value - self.lo)


@dataclass(frozen=True)
class ExpectedSumCurve:
    """beta -> E[sum of offspring ratios^beta], strictly decreasing.

    Exact-series mode sums a deterministic ratio sequence and certifies
    the remainder with the model's geometric domination; Monte Carlo mode
    averages over sampled ratio vectors with a normal confidence
    half-width.
    """

    mode: str  # "exact-series" | "monte-carlo"
    ratio_sequence: Callable[[int], float] | None = None
    ratio_count: int | None = None
    tail_domination: tuple[float, float] | None = None
    ratio_law: object | None = None
    arity: int | None = None
    samples: int = 10_000
    confidence_z: float = _Z99
    seed: int = 0


def curve_for_model(model: ModelSpec, samples: int = 10_000,
                    seed: int = 0) -> ExpectedSumCurve:
    if model.deterministic_ratios:
        if model.ratio_sequence is None:
            raise ValueError(f"model {model.name} lacks a ratio sequence")
        return ExpectedSumCurve(mode="exact-series",
                                ratio_sequence=model.ratio_sequence,
                                ratio_count=model.ratio_count,
                                tail_domination=model.tail_domination)
    if model.ratio_law is None or model.arity is None:
        raise ValueError(f"model {model.name} lacks a sampleable ratio law")
    return ExpectedSumCurve(mode="monte-carlo", ratio_law=model.ratio_law,
                            arity=model.arity, samples=samples, seed=seed)


def _exact_sum(curve: ExpectedSumCurve, beta: float,
               early_above: float | None, rel_tol: float = 1e-14,
               max_terms: int = 200_000) -> CurveValue:
    seq = curve.ratio_sequence
    partial = 0.0
    if curve.ratio_count is not None:
        for n in range(1, curve.ratio_count + 1):
            partial += seq(n) ** beta
        return CurveValue(partial, partial, partial)
    if curve.tail_domination is None:
        raise ValueError("infinite ratio series needs a tail domination")
    c, q = curve.tail_domination
    qb = q ** beta
    if qb >= 1.0:
        raise ValueError(f"divergent: tail bound infinite at beta={beta}")
    cb = c ** beta
    tail = math.inf
    for n in range(1, max_terms + 1):
        partial += seq(n) ** beta
        tail = cb * qb ** (n + 1) / (1.0 - qb)
        if tail <= rel_tol * max(partial, 1.0):
            break
        if early_above is not None and partial > early_above:
            break
    return CurveValue(partial, partial, partial + tail)


def _mc_sum(curve: ExpectedSumCurve, beta: float) -> CurveValue:
    key = np.frombuffer(np.float64(beta).tobytes(), dtype=np.uint32)
    ss = np.random.SeedSequence(entropy=curve.seed,
                                spawn_key=tuple(int(w) for w in key))
    rng = np.random.Generator(np.random.Philox(ss))
    ratios = curve.ratio_law.sample(rng, (curve.samples, curve.arity))
    sums = np.power(ratios, beta).sum(axis=1)
    mean = float(np.mean(sums))
    hw = curve.confidence_z * float(np.std(sums, ddof=1)) / math.sqrt(curve.samples)
    return CurveValue(mean, mean - hw, mean + hw)


def expected_sum_ratios(curve: ExpectedSumCurve, beta: float,
                        early_above: float | None = None) -> CurveValue:
    """Evaluate the curve at beta with a certified (exact) or confidence
    (Monte Carlo) enclosure.  early_above stops an exact summation as
    soon as the partial sum alone certifies exceeding that level."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    if curve.mode == "exact-series":
        return _exact_sum(curve, beta, early_above)
    if curve.mode == "monte-carlo":
        return _mc_sum(curve, beta)
    raise ValueError(f"unknown curve mode {curve.mode!r}")


@dataclass(frozen=True)
class AlphaSolution:
    alpha: float
    bracket: tuple[float, float]
    residual: float
    tail_bound_at_alpha: float
    mode: str


def solve_alpha(curve: ExpectedSumCurve, tol: float | None = None) -> AlphaSolution:
    """Bisect E[sum ratios^beta] = 1 on (0, 1].

    Exact mode certifies each decision from the partial sum or the tail
    bound; in Monte Carlo mode decisions use the sample mean and the
    returned bracket is widened to the last evaluations whose confidence
    intervals excluded 1.
    """
    exact = curve.mode == "exact-series"
    if tol is None:
        tol = 1e-9 if exact else 1e-3
    lo, hi = _BRACKET
    v_lo = expected_sum_ratios(curve, lo, early_above=1.0)
    v_hi = expected_sum_ratios(curve, hi)
    if not v_lo.lo > 1.0:
        raise ValueError("subcritical or degenerate: curve never exceeds 1 on the bracket")
    if v_hi.lo > 1.0:
        raise ValueError("subcritical or degenerate: curve stays above 1 at beta = 1")
    cert_lo, cert_hi = lo, hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v = expected_sum_ratios(curve, mid, early_above=1.0)
        if v.value > 1.0:
            lo = mid
            if v.lo > 1.0:
                cert_lo = max(cert_lo, mid)
        else:
            hi = mid
            if v.hi < 1.0:
                cert_hi = min(cert_hi, mid)
    alpha = 0.5 * (lo + hi)
    v = expected_sum_ratios(curve, alpha)
    bracket = (lo, hi) if exact else (cert_lo, cert_hi)
    return AlphaSolution(alpha=alpha, bracket=bracket,
                         residual=abs(v.value - 1.0),
                         tail_bound_at_alpha=v.half_width,
                         mode=curve.mode)


def make_scale_grid(r_max: float = 1e-1, r_min: float = 1e-6,
                    points_per_decade: int = 4) -> list[float]:
    """Log-uniform descending grid of scales, endpoints included."""
    if not 0.0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    if points_per_decade < 2:
        raise ValueError("points_per_decade must be >= 2")
    out = []
    k = 0
    while True:
        r = r_max * 10.0 ** (-k / points_per_decade)
        if r < r_min * (1.0 - 1e-12):
            break
        out.append(r)
        k += 1
    return out


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    stderr: float
    r_min: float
    r_max: float
    points_used: int
    count_type: str
    r_squared: float
    clamped: bool = False
    note: str = ""


def _envelope_indices(xs, ys, mode):
    # The running ratio log(count)/-log(r) wobbles around the least-squares
    # trend (log-periodically for self-similar sets).  The upper (lower)
    # envelope of that wobble is traced by the local peaks (troughs) of the
    # detrended residuals; fitting through them is the finite-data stand-in
    # for lim sup (lim inf).  Plateaus count as extrema, so exact power-law
    # tables keep every row.
    trend = linregress(xs, ys)
    resid = [y - (trend.slope * x + trend.intercept) for x, y in zip(xs, ys)]
    n = len(resid)
    keep = []
    for i in range(n):
        left = resid[i - 1] if i > 0 else resid[i]
        right = resid[i + 1] if i < n - 1 else resid[i]
        if mode == "upper":
            if resid[i] >= left and resid[i] >= right:
                keep.append(i)
        else:
            if resid[i] <= left and resid[i] <= right:
                keep.append(i)
    return keep


def _regress(xs, ys, mode, count_type):
    idx = _envelope_indices(xs, ys, mode)
    note = ""
    if len(idx) < 4:
        idx = list(range(len(xs)))  # envelope too sparse; fit everything
        note = "envelope sparse: fit uses all rows"
    res = linregress([xs[i] for i in idx], [ys[i] for i in idx])
    slope = float(res.slope)
    clamped = False
    if slope < 0.0 or slope > 1.0:
        warnings.warn(f"regression slope {slope:.4f} outside [0, 1]; clamped")
        slope = min(max(slope, 0.0), 1.0)
        clamped = True
    return slope, float(res.stderr), float(res.rvalue ** 2), clamped, len(idx), note


def estimate_box_dimension(table: Sequence[tuple[float, float]],
                           fit_window: tuple[float, float] | None = None,
                           mode: str = "upper", *,
                           count_type: str = "covering",
                           min_count: float | None = None,
                           max_count: float | None = None) -> DimensionEstimate:
    """Least-squares slope of log(count) against -log(r).

    The upper (lower) mode fits the upper (lower) envelope of the running
    ratio log(count)/-log(r), the finite-scale stand-in for lim sup
    versus lim inf.  Rows outside the window or the count filters are
    dropped; a table of equal counts short-circuits to slope 0.
    """
    if mode not in ("upper", "lower"):
        raise ValueError("mode must be 'upper' or 'lower'")
    rows = [(float(r), float(c)) for r, c in table]
    if fit_window is not None:
        w_lo, w_hi = fit_window
        rows = [(r, c) for r, c in rows if w_lo <= r <= w_hi]
    if not rows:
        raise ValueError("fewer than 4 usable rows")
    if any(c <= 0 for _, c in rows):
        raise ValueError("counts must be positive")
    if len({c for _, c in rows}) == 1:
        return DimensionEstimate(slope=0.0, stderr=0.0,
                                 r_min=min(r for r, _ in rows),
                                 r_max=max(r for r, _ in rows),
                                 points_used=len(rows), count_type=count_type,
                                 r_squared=1.0)
    if min_count is not None:
        rows = [(r, c) for r, c in rows if c >= min_count]
    if max_count is not None:
        rows = [(r, c) for r, c in rows if c <= max_count]
    if len(rows) < 4:
        raise ValueError("fewer than 4 usable rows")
    rows.sort(key=lambda rc: -rc[0])
    xs = [-math.log(r) for r, _ in rows]
    ys = [math.log(c) for _, c in rows]
    slope, stderr, r2, clamped, used, note = _regress(xs, ys, mode, count_type)
    return DimensionEstimate(slope=slope, stderr=stderr,
                             r_min=rows[-1][0], r_max=rows[0][0],
                             points_used=used, count_type=count_type,
                             r_squared=r2, clamped=clamped, note=note)


def covering_rows(rows: Sequence[tuple[float, int, int]]) -> list[tuple[float, float]]:
    return [(r, float(n)) for r, n, _ in rows]


def packing_rows(rows: Sequence[tuple[float, int, int]]) -> list[tuple[float, float]]:
    return [(r, float(p)) for r, _, p in rows]


def estimate_set_dimension(compact: CompactSet, scales: Sequence[float],
                           mode: str = "upper", *,
                           count_type: str = "covering",
                           saturation_min: float = 10.0) -> DimensionEstimate:
    """Box-dimension estimate of an explicit set with the standard
    count filters: drop rows with count < saturation_min (large-r
    saturation) or count > half the available atoms (resolution floor).
    The atom floor only applies to dust-like sets; a union of a few long
    intervals resolves at every scale and takes no cap."""
    rows = count_table(compact, scales)
    pairs = covering_rows(rows) if count_type == "covering" else packing_rows(rows)
    if len({c for _, c in pairs}) == 1:
        return estimate_box_dimension(pairs, mode=mode, count_type=count_type)
    atoms = compact.n_intervals
    cap = 0.5 * atoms if 0.5 * atoms > saturation_min else None
    return estimate_box_dimension(pairs, mode=mode, count_type=count_type,
                                  min_count=saturation_min, max_count=cap)


def _dropped_ball_impact(hull: tuple[float, float] | None,
                         dropped: int | None, r: float) -> float:
    if hull is None and (dropped is None or dropped == 0):
        return 0.0
    if hull is None:
        return float(dropped)
    impact = math.floor((hull[1] - hull[0]) / (2.0 * r))
    if dropped is not None:
        impact = min(impact, dropped)
    return float(impact)


def estimate_orbit_dimension(rz: Realization, base: Address, x: float,
                             scales: Sequence[float], mode: str = "upper",
                             *, max_dropped_fraction: float = 0.01,
                             saturation_min: float = 10.0) -> DimensionEstimate:
    """Box dimension of the depth-1 orbit of x below base.

    Rows where the truncated offspring could shift counts by more than
    max_dropped_fraction (measured as balls covering the dropped hull,
    with a one-ball straddle allowance) are removed from the small-r
    side and the shrink is noted.
    """
    orb = orbit(rz, base, x, 1)
    atoms = orb.points.n_intervals
    if atoms < 4:
        raise ValueError("orbit too small")
    rows = covering_rows(count_table(orb.points, scales))
    if len({c for _, c in rows}) == 1:
        return estimate_box_dimension(rows, mode=mode)
    kept = []
    shrunk = False
    for r, c in rows:
        if _dropped_ball_impact(orb.dropped_hull, orb.dropped, r) > \
                max(1.0, max_dropped_fraction * c):
            shrunk = True
            continue
        kept.append((r, c))
    est = estimate_box_dimension(kept, mode=mode,
                                 min_count=saturation_min,
                                 max_count=0.5 * atoms)
    if shrunk:
        est = DimensionEstimate(**{**est.__dict__, "note": "window shrunk: truncation impact"})
    return est


@dataclass(frozen=True)
class XIndependenceReport:
    first: DimensionEstimate
    second: DimensionEstimate
    difference: float
    tolerance: float
    ok: bool


def x_independence_check(rz: Realization, base: Address, x1: float, x2: float,
                         scales: Sequence[float]) -> XIndependenceReport:
    """Orbit-dimension estimates for two reference points must agree
    within three combined standard errors."""
    e1 = estimate_orbit_dimension(rz, base, x1, scales)
    e2 = estimate_orbit_dimension(rz, base, x2, scales)
    diff = abs(e1.slope - e2.slope)
    tol = 3.0 * math.hypot(e1.stderr, e2.stderr)
    return XIndependenceReport(first=e1, second=e2, difference=diff,
                               tolerance=tol, ok=diff <= tol)


@dataclass(frozen=True)
class GammaSupReport:
    gamma: float
    argmax: Address
    estimates: dict
    skipped: tuple[Address, ...]


def estimate_gamma_sup(rz: Realization, bases, x: float,
                       scales: Sequence[float]) -> GammaSupReport:
    """Maximum depth-1 orbit dimension over a family of base nodes: an
    explicit antichain of addresses, or every alive address up to an
    integer level cap.  Too-small orbits are skipped with a warning."""
    if isinstance(bases, int):
        candidates = [a for k in range(0, min(bases, rz.max_depth - 1) + 1)
                      for a in rz.addresses_at(k)]
    else:
        candidates = [tuple(b) for b in bases]
    estimates = {}
    skipped = []
    for addr in candidates:
        try:
            estimates[addr] = estimate_orbit_dimension(rz, addr, x, scales)
        except ValueError as exc:
            skipped.append(addr)
            warnings.warn(f"skipping base {addr}: {exc}")
    if not estimates:
        raise ValueError("no base produced a usable orbit")
    argmax = max(estimates, key=lambda a: estimates[a].slope)
    return GammaSupReport(gamma=estimates[argmax].slope, argmax=argmax,
                          estimates=estimates, skipped=tuple(skipped))


def eval_mink(alpha: float, gamma: float) -> float:
    """Minkowski-dimension formula: max of the Hausdorff exponent and the
    orbit-dimension supremum."""
    for name, v in (("alpha", alpha), ("gamma", gamma)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return max(alpha, gamma)


def eval_packsim(alpha: float, ess_sup_orbit_dim: float,
                 self_similar: bool) -> float | None:
    """Packing dimension for self-similar constructions; None when the
    model is not self-similar (the general case is open)."""
    if not self_similar:
        return None
    return max(alpha, ess_sup_orbit_dim)


@dataclass(frozen=True)
class AntichainMomentReport:
    empirical_mean: float
    stderr: float
    bound: float
    p: float
    q: int
    replicas: int
    passed: bool


def _stopping_depth(model: ModelSpec, q: int, shrink: float) -> int:
    d = 1
    while model.max_ratio ** d >= shrink:
        d += 1
    return max(q, d)


def antichain_moment_test(model: ModelSpec, t: float, q: int, replicas: int,
                          seed: int, *, shrink: float = 0.2,
                          eps_trunc: float = 1e-12,
                          antichain_rule=None,
                          alpha_margin: float = 0.02,
                          curve_seed: int = 0) -> AntichainMomentReport:
    """Check the stopping-set moment bound E[sum over the antichain of
    diam^t] <= p^q / (1 - p) with p = E[sum ratios^t].

    Truncation only removes summands, so the empirical mean stays on the
    conservative side of the bound.
    """
    curve = curve_for_model(model, seed=curve_seed)
    alpha = solve_alpha(curve)
    if t < alpha.alpha + alpha_margin:
        raise ValueError(
            f"t = {t} must be at least alpha + {alpha_margin} = "
            f"{alpha.alpha + alpha_margin:.4f}")
    pv = expected_sum_ratios(curve, t)
    if pv.value >= 1.0:
        raise ValueError(f"hypothesis violated: p = {pv.value} >= 1")
    p = pv.value
    depth = _stopping_depth(model, q, shrink)
    sums = np.empty(replicas)
    for i in range(replicas):
        rz = sample_realization(model, derive_seed(seed, i), depth, eps_trunc)
        if antichain_rule is not None:
            chain = antichain_rule(rz)
        else:
            chain = stopping_set(rz, ROOT, q, shrink)
        sums[i] = sum(rz.nodes[a].diameter ** t for a in chain)
    mean = float(np.mean(sums))
    stderr = float(np.std(sums, ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    bound = p ** q / (1.0 - p)
    return AntichainMomentReport(empirical_mean=mean, stderr=stderr,
                                 bound=bound, p=p, q=q, replicas=replicas,
                                 passed=mean <= bound + 3.0 * stderr)


@dataclass(frozen=True)
class FiniteCoincidenceReport:
    applicable: bool
    estimate: DimensionEstimate | None
    alpha: AlphaSolution | None
    difference: float | None
    tolerance: float | None
    ok: bool | None


def finite_coincidence_check(model: ModelSpec, seed: int, depth: int,
                             scales: Sequence[float], *,
                             eps_trunc: float = 1e-12,
                             base_tol: float = 0.05,
                             curve_seed: int = 0) -> FiniteCoincidenceReport:
    """For finite-branching models the box dimension of a deep level
    union must match the solved exponent (all four dimensions coincide)."""
    if not model.finite_branching:
        return FiniteCoincidenceReport(applicable=False, estimate=None,
                                       alpha=None, difference=None,
                                       tolerance=None, ok=None)
    rz = sample_realization(model, seed, depth, eps_trunc)
    union = level_union(rz, depth, survivors_only=True)
    est = estimate_set_dimension(union, scales)
    alpha = solve_alpha(curve_for_model(model, seed=curve_seed))
    diff = abs(est.slope - alpha.alpha)
    half = 0.5 * (alpha.bracket[1] - alpha.bracket[0])
    tol = base_tol + 3.0 * est.stderr + half
    return FiniteCoincidenceReport(applicable=True, estimate=est, alpha=alpha,
                                   difference=diff, tolerance=tol,
                                   ok=diff <= tol)

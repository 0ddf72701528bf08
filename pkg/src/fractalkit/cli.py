"""Seeded, reproducible command line: solve exponents, estimate dimensions,
generate realizations, and run the acceptance suite.

Every command is a deterministic function of its flags, config file, and
seed; repeated runs emit byte-identical output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .construction import (
    level_union,
    realization_export,
    sample_realization,
    sample_surviving,
)
from .dimension import (
    curve_for_model,
    estimate_orbit_dimension,
    estimate_set_dimension,
    make_scale_grid,
    solve_alpha,
)
from .geometry import count_table, table_to_csv
from .models import get_model, orbit_set
from .parallel import statistic_sample

ENV_SEED = "FRACTALKIT_SEED"

CONFIG_KEYS = {
    "task", "model", "params", "seed", "max_depth", "eps_trunc", "scales",
    "replicas", "semantics", "condition_on_survival", "statistic", "level",
    "output",
}

SCALE_KEYS = {"r_max", "r_min", "points_per_decade"}

MODEL_PARAM_FLAGS = ("ratio", "arity", "p", "lo", "hi", "law", "cutoff")


def _default_seed() -> int:
    env = os.environ.get(ENV_SEED)
    return int(env) if env else 0


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _model_params(args) -> dict:
    out = {}
    for key in MODEL_PARAM_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def _build_model(name: str, params: dict):
    params = dict(params)
    params.pop("cutoff", None)
    return get_model(name, **params)


def _scales_from(args) -> list[float]:
    return make_scale_grid(r_max=args.rmax, r_min=args.rmin,
                           points_per_decade=args.ppd)


def _target_set(name: str, params: dict, seed: int, depth: int, eps: float,
                semantics: str, survival: bool):
    """The compact set a dimension command measures: the explicit orbit
    point set, or a deep survivor level union of a sampled realization."""
    if name == "orbit_set":
        return orbit_set(float(params.get("p", 1.0)),
                         float(params.get("cutoff", 1e-7))), None
    model = _build_model(name, params)
    if survival:
        rz = sample_surviving(model, seed, depth, eps, semantics)
    else:
        rz = sample_realization(model, seed, depth, eps, semantics)
    return level_union(rz, depth, survivors_only=True), rz


def _add_model_flags(sub) -> None:
    sub.add_argument("--model", required=True,
                     help="cantor | homogeneous | example1 | example2 | "
                          "example2_deep | orbit_set")
    sub.add_argument("--ratio", type=float)
    sub.add_argument("--arity", type=int)
    sub.add_argument("--p", type=float)
    sub.add_argument("--lo", type=float)
    sub.add_argument("--hi", type=float)
    sub.add_argument("--law", type=str)
    sub.add_argument("--cutoff", type=float)


def _add_common_flags(sub, depth_default=8) -> None:
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--depth", type=int, default=depth_default)
    sub.add_argument("--eps", type=float, default=1e-12)
    sub.add_argument("--semantics", choices=("recursive", "fractal"),
                     default="recursive")
    sub.add_argument("--survival", action="store_true",
                     help="rejection-resample until the realization survives")


def cmd_solve_alpha(args) -> int:
    model = _build_model(args.model, _model_params(args))
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        sol = solve_alpha(curve_for_model(model, samples=args.samples,
                                          seed=seed),
                          tol=args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = {"model": model.name, "params": model.params,
           "alpha": sol.alpha, "bracket": list(sol.bracket),
           "residual": sol.residual,
           "tail_bound_at_alpha": sol.tail_bound_at_alpha, "mode": sol.mode}
    _emit(_dump(doc), args.json)
    return 0


def cmd_boxdim(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    params = _model_params(args)
    try:
        target, _ = _target_set(args.model, params, seed, args.depth,
                                args.eps, args.semantics, args.survival)
        scales = _scales_from(args)
        rows = count_table(target, scales)
        est = estimate_set_dimension(target, scales, mode=args.mode)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.csv is not None:
        _emit(table_to_csv(rows), args.csv)
    doc = {"model": args.model, "params": params, "seed": seed,
           "depth": args.depth, "atoms": target.n_intervals}
    doc.update(dataclasses.asdict(est))
    _emit(_dump(doc), args.json)
    return 0


def cmd_orbit_dim(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    params = _model_params(args)
    base = tuple(int(d) for d in args.base.split(",") if d) if args.base else ()
    try:
        model = _build_model(args.model, params)
        rz = sample_realization(model, seed, args.depth, args.eps,
                                args.semantics)
        est = estimate_orbit_dimension(rz, base, args.x, _scales_from(args),
                                       mode=args.mode)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = {"model": args.model, "params": params, "seed": seed,
           "base": list(base), "x": args.x}
    doc.update(dataclasses.asdict(est))
    _emit(_dump(doc), args.json)
    return 0


def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        model = _build_model(args.model, _model_params(args))
        if args.survival:
            rz = sample_surviving(model, seed, args.depth, args.eps,
                                  args.semantics)
        else:
            rz = sample_realization(model, seed, args.depth, args.eps,
                                    args.semantics)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        _emit(_dump(realization_export(rz)), args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def load_config(path: str) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    scales = cfg.get("scales", {})
    bad = set(scales) - SCALE_KEYS
    if bad:
        raise ValueError(f"unknown scale keys: {sorted(bad)}")
    if "r_min" in scales and "r_max" in scales:
        if not scales["r_min"] < scales["r_max"]:
            raise ValueError("scales.r_min must be below scales.r_max")
    if scales.get("points_per_decade", 4) < 2:
        raise ValueError("scales.points_per_decade must be >= 2")
    if cfg.get("replicas", 1) < 1:
        raise ValueError("replicas must be >= 1")
    return cfg


def cmd_experiment(args) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else cfg.get("seed", _default_seed())
    task = cfg.get("task", "boxdim")
    name = cfg.get("model", "cantor")
    params = cfg.get("params", {})
    depth = cfg.get("max_depth", 8)
    eps = cfg.get("eps_trunc", 1e-12)
    semantics = cfg.get("semantics", "recursive")
    survival = cfg.get("condition_on_survival", False)
    sc = cfg.get("scales", {})
    scales = make_scale_grid(sc.get("r_max", 1e-1), sc.get("r_min", 1e-6),
                             sc.get("points_per_decade", 4))
    out = args.out if args.out is not None else cfg.get("output")
    try:
        if task == "solve-alpha":
            sol = solve_alpha(curve_for_model(_build_model(name, params),
                                              seed=seed))
            doc = {"task": task, "model": name, "alpha": sol.alpha,
                   "bracket": list(sol.bracket), "residual": sol.residual,
                   "mode": sol.mode}
        elif task == "boxdim":
            target, _ = _target_set(name, params, seed, depth, eps,
                                    semantics, survival)
            est = estimate_set_dimension(target, scales)
            doc = {"task": task, "model": name, "seed": seed}
            doc.update(dataclasses.asdict(est))
        elif task == "generate":
            model = _build_model(name, params)
            rz = (sample_surviving(model, seed, depth, eps, semantics)
                  if survival else
                  sample_realization(model, seed, depth, eps, semantics))
            doc = realization_export(rz)
        elif task == "sampler-stats":
            values = statistic_sample(
                name, params, semantics, cfg.get("statistic", "count"),
                cfg.get("replicas", 100), seed, level=cfg.get("level", 2),
                max_depth=depth if "max_depth" in cfg else None,
                eps_trunc=eps, threads=args.threads)
            doc = {"task": task, "model": name, "seed": seed,
                   "statistic": cfg.get("statistic", "count"),
                   "level": cfg.get("level", 2), "values": values}
        else:
            raise ValueError(f"unknown task {task!r}")
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(_dump(doc), out)
    return 0


def cmd_verify(args) -> int:
    from .verify import format_report, run_suite
    seed = args.seed if args.seed is not None else _default_seed()
    results = run_suite(args.suite, seed=seed, threads=args.threads)
    sys.stdout.write(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalkit",
        description="Random recursive constructions on [0,1] and their dimensions")
    sub = parser.add_subparsers(dest="command", required=True)

    sa = sub.add_parser("solve-alpha", help="root of the expectation equation")
    _add_model_flags(sa)
    sa.add_argument("--seed", type=int, default=None)
    sa.add_argument("--tol", type=float, default=None)
    sa.add_argument("--samples", type=int, default=10_000)
    sa.add_argument("--json", default=None, help="output path (default stdout)")
    sa.set_defaults(func=cmd_solve_alpha)

    bd = sub.add_parser("boxdim", help="box-counting dimension of a set")
    _add_model_flags(bd)
    _add_common_flags(bd)
    bd.add_argument("--rmax", type=float, default=1e-1)
    bd.add_argument("--rmin", type=float, default=1e-6)
    bd.add_argument("--ppd", type=int, default=4, help="scale points per decade")
    bd.add_argument("--mode", choices=("upper", "lower"), default="upper")
    bd.add_argument("--csv", default=None, help="write the count table here")
    bd.add_argument("--json", default=None)
    bd.set_defaults(func=cmd_boxdim)

    od = sub.add_parser("orbit-dim", help="depth-1 orbit dimension at a node")
    _add_model_flags(od)
    _add_common_flags(od, depth_default=1)
    od.add_argument("--base", default="", help="comma-separated address digits")
    od.add_argument("--x", type=float, default=1.0)
    od.add_argument("--rmax", type=float, default=1e-1)
    od.add_argument("--rmin", type=float, default=1e-6)
    od.add_argument("--ppd", type=int, default=8)
    od.add_argument("--mode", choices=("upper", "lower"), default="upper")
    od.add_argument("--json", default=None)
    od.set_defaults(func=cmd_orbit_dim)

    gn = sub.add_parser("generate", help="sample and export a realization")
    _add_model_flags(gn)
    _add_common_flags(gn, depth_default=3)
    gn.add_argument("--out", default=None)
    gn.set_defaults(func=cmd_generate)

    ex = sub.add_parser("experiment", help="run a JSON-configured experiment")
    ex.add_argument("--config", required=True)
    ex.add_argument("--seed", type=int, default=None)
    ex.add_argument("--threads", type=int, default=1)
    ex.add_argument("--out", default=None)
    ex.set_defaults(func=cmd_experiment)

    vf = sub.add_parser("verify", help="run the acceptance checks")
    vf.add_argument("--suite", choices=("quick", "full"), default="quick")
    vf.add_argument("--seed", type=int, default=None)
    vf.add_argument("--threads", type=int, default=1)
    vf.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

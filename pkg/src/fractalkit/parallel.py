"""Replica-level parallelism with a deterministic merge.

Workers rebuild models from registry names, so tasks stay picklable; the
result list is ordered by replica index and is byte-identical to the
serial path regardless of worker count or scheduling.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from .construction import _statistic_value, derive_seed, sample_realization
from .models import get_model


def _stat_task(args: tuple) -> tuple[int, float]:
    (name, params, semantics, statistic, level, depth, eps, seed, idx) = args
    model = get_model(name, **params)
    rz = sample_realization(model, derive_seed(seed, idx), depth, eps, semantics)
    return idx, _statistic_value(rz, statistic, level)


def statistic_sample(model_name: str, params: dict, semantics: str,
                     statistic: str, replicas: int, seed: int, *,
                     level: int, max_depth: int | None = None,
                     eps_trunc: float = 1e-12, threads: int = 1) -> list[float]:
    """Same contract as sampler_statistic_distribution, optionally fanned
    out over a process pool."""
    depth = level if max_depth is None else max_depth
    tasks = [(model_name, params, semantics, statistic, level, depth,
              eps_trunc, seed, i) for i in range(replicas)]
    if threads <= 1:
        results = [_stat_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_stat_task, tasks,
                                    chunksize=max(1, replicas // (4 * threads))))
    results.sort(key=lambda pair: pair[0])
    return [v for _, v in results]

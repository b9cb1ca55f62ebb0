"""Worker-count policy and deterministic sharding for Monte Carlo loops."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConfigInvalid

N_SHARDS = 8


def worker_count() -> int:
    """Threads allowed by ``HOROFLOW_THREADS`` (default: CPU count)."""
    raw = os.environ.get("HOROFLOW_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigInvalid(f"HOROFLOW_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigInvalid(f"HOROFLOW_THREADS must be a positive integer, got {raw!r}")
    return n


def shard_sizes(n: int, n_shards: int = N_SHARDS) -> list[int]:
    base, extra = divmod(n, n_shards)
    return [base + (i < extra) for i in range(n_shards)]


def shard_rngs(seed: int, n_shards: int = N_SHARDS) -> list[np.random.Generator]:
    """Independent generators, one per shard; the split never depends on the thread count."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_shards)]


def map_shards(fn, args: list):
    """``[fn(a) for a in args]``, run on up to :func:`worker_count` threads, order preserved."""
    workers = min(worker_count(), len(args))
    if workers <= 1:
        return [fn(a) for a in args]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args))

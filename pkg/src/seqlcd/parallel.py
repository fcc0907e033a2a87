"""Deterministic chunked execution over a bounded worker pool."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

from seqlcd.errors import ConfigError


def resolve_threads(threads: int) -> int:
    """0 means auto (cpu count); negative counts are rejected."""
    if threads < 0:
        raise ConfigError(f"thread count must be >= 0, got {threads}")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def run_chunked(fn: Callable[[int, int], None], total: int, threads: int) -> None:
    """Run ``fn(start, end)`` over contiguous chunks of [0, total).

    Results must not depend on the chunking: each chunk writes a disjoint
    output slice and every element is computed independently.
    """
    threads = resolve_threads(threads)
    if total <= 0:
        return
    n_chunks = min(threads, total)
    if n_chunks == 1:
        fn(0, total)
        return
    bounds = [(total * k) // n_chunks for k in range(n_chunks + 1)]
    with ThreadPoolExecutor(max_workers=n_chunks) as pool:
        futures = [
            pool.submit(fn, bounds[k], bounds[k + 1]) for k in range(n_chunks)
        ]
        for fut in futures:
            fut.result()

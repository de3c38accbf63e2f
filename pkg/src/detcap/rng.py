"""Seeded stream derivation and chunked parallel evaluation.

Every random quantity comes from a stream named by ``(master_seed, purpose,
*indices)``. Work is cut into fixed-size chunks that each own their stream,
so results do not depend on how many workers run the chunks.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

CHUNK = 1000

T = TypeVar("T")


def purpose(name: str) -> int:
    return zlib.crc32(name.encode())


def stream(seed: int, name: str, *indices: int) -> np.random.Generator:
    key = (purpose(name),) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def workers() -> int:
    env = os.environ.get("DETCAP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    return [min(chunk, total - lo) for lo in range(0, total, chunk)]


def map_chunks(fn: Callable[[int, int], T], sizes: Sequence[int]) -> list[T]:
    """``[fn(i, size_i) for i]`` in order, spread over ``workers()`` threads."""
    nw = min(workers(), len(sizes))
    if nw <= 1:
        return [fn(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))

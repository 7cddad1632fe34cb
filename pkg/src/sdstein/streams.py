"""Counter-based random streams.

A stream is addressed by ``(seed, tag, *indices)``; the same address always
yields the same Philox generator, independently of how many other streams were
created before it or in which order.  Bulk sampling is cut into fixed-size
chunks with one stream per chunk, so a batch of ``n`` draws is a deterministic
function of ``(seed, tag, n)`` whatever the number of workers.
"""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 14


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf8"))


def stream(seed: int, tag: str, *indices: int) -> np.random.Generator:
    if seed is None:
        raise ValueError("a seed is mandatory")
    key = [int(seed) & 0xFFFFFFFF, int(seed) >> 32 & 0xFFFFFFFF, _tag_key(tag)]
    key.extend(int(i) for i in indices)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SDSTEIN_THREADS", "1")))
    except ValueError:
        return 1


def chunked(n: int, seed: int, tag: str, draw, *indices: int):
    """Concatenate ``draw(rng, m)`` over fixed chunks of ``n`` rows.

    ``draw`` must return an array whose first axis has length ``m``.  Chunks are
    evaluated on up to ``SDSTEIN_THREADS`` threads; the result does not depend
    on that number.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sizes = [CHUNK] * (n // CHUNK)
    if n % CHUNK:
        sizes.append(n % CHUNK)

    def job(i):
        return draw(stream(seed, tag, *indices, i), sizes[i])

    workers = min(worker_count(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    return np.concatenate(parts, axis=0)

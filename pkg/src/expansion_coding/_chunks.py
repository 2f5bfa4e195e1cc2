"""Deterministic chunked random streams.

Work of size ``n`` is cut into fixed chunks of ``CHUNK_SIZE`` samples. Chunk
``k`` draws from ``PCG64(SeedSequence(seed, spawn_key=(k,)))``, so the output
does not depend on how many workers process the chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 1 << 16
GENERATOR = "numpy PCG64, SeedSequence(seed, spawn_key=(chunk_index,))"


def chunk_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def chunk_sizes(n: int) -> list[int]:
    full, rest = divmod(n, CHUNK_SIZE)
    return [CHUNK_SIZE] * full + ([rest] if rest else [])


def map_chunks(fn, n: int, seed: int, workers: int = 1) -> list:
    """Call ``fn(rng, size)`` per chunk; results come back in chunk order."""
    if n < 1:
        raise ValueError("sample count must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    jobs = list(enumerate(chunk_sizes(n)))

    def run(job):
        k, size = job
        return fn(chunk_generator(seed, k), size)

    if workers == 1 or len(jobs) == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))

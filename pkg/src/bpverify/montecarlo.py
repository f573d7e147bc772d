"""Chunked Monte-Carlo estimation with deterministic merging.

A sample budget is cut into fixed-size chunks; chunk ``i`` of an estimator
tagged ``tag`` draws from ``RngStream(seed, (tag << 32) | i)``. Chunk
statistics are merged in chunk order, so the result depends only on the
seed, the tag and the budget, never on how many workers ran the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgumentError
from .sampling import RngStream

CHUNK_SIZE = 1 << 15
#: maximum tolerated fraction of rejected (degenerate) draws
MAX_REJECT_FRACTION = 1e-4


@dataclass(frozen=True)
class McEstimate:
    """One side of an identity: sample mean, its standard error and sample counts.

    Exact values use ``method="closed"`` and quadrature results
    ``method="quadrature"``; for the latter `stderr` holds the error bound.
    """

    mean: float
    stderr: float
    samples: int
    rejected: int = 0
    method: str = "mc"

    @classmethod
    def exact(cls, value, method="closed"):
        return cls(float(value), 0.0, 0, 0, method)

    @property
    def flagged(self):
        return self.samples > 0 and self.rejected > MAX_REJECT_FRACTION * self.samples

    def scaled(self, factor):
        return McEstimate(self.mean * factor, self.stderr * abs(factor),
                          self.samples, self.rejected, self.method)

    def to_dict(self):
        return asdict(self)


def _chunk_stats(kernel, seed, tag, index, size):
    gen = RngStream(seed, (tag << 32) | index).generator()
    values, rejected = kernel(gen, size)
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    m2 = float(np.sum((values - mean) ** 2))
    return values.size, mean, m2, int(rejected)


def run_mc(kernel, samples, seed, tag, workers=1, chunk_size=CHUNK_SIZE):
    """Estimate ``E[kernel]`` from `samples` draws split into chunks.

    `kernel` is called as ``kernel(generator, size)`` and returns
    ``(values, rejected)``.
    """
    samples = int(samples)
    if samples < 2:
        raise InvalidArgumentError(f"need at least 2 samples, got {samples}")
    if not 0 <= seed < 2**64:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    jobs = [(kernel, seed, tag, i, size) for i, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda job: _chunk_stats(*job), jobs))
    else:
        stats = [_chunk_stats(*job) for job in jobs]

    count, mean, m2, rejected = 0, 0.0, 0.0, 0
    for n_b, mean_b, m2_b, rej_b in stats:
        total = count + n_b
        delta = mean_b - mean
        mean += delta * n_b / total
        m2 += m2_b + delta * delta * count * n_b / total
        count = total
        rejected += rej_b
    stderr = math.sqrt(m2 / (count - 1) / count)
    return McEstimate(mean, stderr, count, rejected)

"""Throughput measurement, with generation and hashing timed separately.

Sequence generation is a real cost at scale, so the benchmark reports it
on its own line instead of folding it into the hashing rate. Absolute
numbers are hardware-bound; only the checksum of the produced hashes is
expected to reproduce across machines for a fixed seed.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .hashing import SelectionStrategy, hash_matrix_stack
from .sequence import MIN_LENGTH, matrix_dim
from .simulate import _matrices_from_codes, sequence_rng


@dataclass(frozen=True)
class BenchReport:
    """Timings for one benchmark run."""

    n: int
    seq_len: int
    strategy: SelectionStrategy
    workers: int
    generation_seconds: float
    hashing_seconds: float
    bits_set: int  # popcount over every produced hash; deterministic per seed

    @property
    def generation_rate(self) -> float:
        return self.n / self.generation_seconds if self.generation_seconds else float("inf")

    @property
    def hashing_rate(self) -> float:
        return self.n / self.hashing_seconds if self.hashing_seconds else float("inf")

    @property
    def generation_share(self) -> float:
        total = self.generation_seconds + self.hashing_seconds
        return self.generation_seconds / total if total else 0.0


def _hash_codes_chunk(codes: np.ndarray, strategy: SelectionStrategy,
                      dim: int) -> tuple[int, int]:
    bits = hash_matrix_stack(_matrices_from_codes(codes, dim), strategy)
    return codes.shape[0], int(bits.sum())


def run_bench(*, seq_len: int = 100, strategy: SelectionStrategy | None = None,
              n: int = 100_000, seed: int = 0, workers: int = 1) -> BenchReport:
    """Generate ``n`` random sequences, hash them all, time both phases.

    Generation draws every base from one seeded stream; hashing runs the
    batched pipeline in chunks (optionally across processes).
    """
    if seq_len < MIN_LENGTH:
        raise ValueError(f"seq_len must be at least {MIN_LENGTH}")
    if n < 1:
        raise ValueError("n must be positive")
    if strategy is None:
        strategy = SelectionStrategy("block", 64)
    dim = matrix_dim(seq_len)
    strategy.positions(dim)  # surface StrategyTooLarge before timing anything

    rng = sequence_rng(seed, 0)
    t0 = time.perf_counter()
    codes = rng.integers(0, 4, size=(n, seq_len), dtype=np.uint8)
    generation_seconds = time.perf_counter() - t0

    chunk = max(64, min(8192, 6_000_000 // (dim * dim)))
    chunks = [codes[s:s + chunk] for s in range(0, n, chunk)]
    worker = partial(_hash_codes_chunk, strategy=strategy, dim=dim)

    t0 = time.perf_counter()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, chunks))
    else:
        results = [worker(c) for c in chunks]
    hashing_seconds = time.perf_counter() - t0

    hashed = sum(r[0] for r in results)
    assert hashed == n
    return BenchReport(
        n=n,
        seq_len=seq_len,
        strategy=strategy,
        workers=workers,
        generation_seconds=generation_seconds,
        hashing_seconds=hashing_seconds,
        bits_set=sum(r[1] for r in results),
    )

"""Throughput of the compiled kernels against the pure-Python fallback."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import generate, sample_realizations
from .rng import derive_seed

__all__ = ["BenchRow", "BENCH_HEADER", "run_benchmarks"]


@dataclass
class BenchRow:
    kernel: str
    backend: str
    n: int
    m: int
    batch: int
    seconds: float
    per_second: float
    identical: bool


BENCH_HEADER = ("kernel", "backend", "n", "m", "batch", "seconds", "per_second", "identical")


def _cases(n: int, batch: int, seed: int):
    sg = generate("erdos_renyi", seed=derive_seed(seed, "bench", n), n=n, density=min(1.0, 6.0 / n), p_range=(0.2, 0.9))
    g = sg.graph
    masks = sample_realizations(sg, [derive_seed(seed, "bench-real", t) for t in range(batch)])
    thr = np.full(g.n, 40, dtype=np.int64)
    small = generate("erdos_renyi", seed=derive_seed(seed, "bench-small", 0), n=min(n, 18), density=0.3, p=0.6)
    sm = sample_realizations(small, [derive_seed(seed, "bench-sreal", t) for t in range(batch)])
    sgv = small.graph
    yield "matching_batch", g, lambda: kernels.matching_batch(g.n, g.eu, g.ev, masks)
    yield "frac_vc2_batch", g, lambda: kernels.frac_vc2_batch(g.n, g.eu, g.ev, masks)
    yield "dwf_events", g, lambda: [kernels.dwf_events(g.n, g.eu, g.ev, row, thr)[2] for row in masks[: max(1, batch // 10)]]
    yield "mvc_size_batch", sgv, lambda: kernels.mvc_size_batch(sgv.n, sgv.eu, sgv.ev, sm)
    yield "mds_size_batch", sgv, lambda: kernels.mds_size_batch(sgv.n, sgv.eu, sgv.ev, sm)


def _same(a, b) -> bool:
    if isinstance(a, list):
        return all(_same(x, y) for x, y in zip(a, b))
    return bool(np.array_equal(np.asarray(a), np.asarray(b)))


def run_benchmarks(n: int = 60, batch: int = 200, seed: int = 1) -> list[BenchRow]:
    """Time every kernel on every available backend and compare their outputs."""
    rows = []
    prev = kernels.backend()
    try:
        for name, g, fn in _cases(n, batch, seed):
            ref = None
            for be in kernels.available_backends():
                kernels.set_backend(be)
                t0 = time.perf_counter()
                out = fn()
                dt = time.perf_counter() - t0
                if ref is None:
                    ref = out
                count = max(1, batch // 10) if name == "dwf_events" else batch
                rows.append(BenchRow(name, be, g.n, g.m, count, dt, count / dt if dt > 0 else float("inf"), _same(ref, out)))
    finally:
        kernels.set_backend(prev)
    return rows

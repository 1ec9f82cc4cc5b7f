"""Exact and Monte-Carlo baselines.

Exact oracles take a ``BaseGraph`` and an optional presence mask over its edge
ids, so the same graph object serves every realization. The exhaustive
``brute_*`` functions are independent cross-checks for small graphs only.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import kernels
from .graph import BaseGraph, StochasticGraph, sample_realizations
from .rng import derive_seed, stream
from .stats import MCEstimate

__all__ = [
    "OracleBudgetError",
    "OracleLimits",
    "LIMITS",
    "FractionalVertexCover",
    "exact_min_vertex_cover",
    "min_vertex_cover_sizes",
    "max_matching",
    "max_matching_sizes",
    "exact_min_dominating_set",
    "min_dominating_set_sizes",
    "optimal_fractional_vertex_cover",
    "fractional_vc_totals",
    "ConditionalF",
    "estimate_conditional_f",
    "MatchMarginals",
    "estimate_match_marginals",
    "tail_expectation_check",
    "brute_min_vertex_cover_size",
    "brute_max_matching_size",
    "brute_min_dominating_set_size",
    "write_csv",
    "MCEstimate",
]


class OracleBudgetError(RuntimeError):
    """Instance exceeds a configured exact-oracle size guard."""


@dataclass
class OracleLimits:
    vc: int = 40
    mds: int = 24
    exhaustive: int = 12


LIMITS = OracleLimits()


def _mask(graph: BaseGraph, mask) -> np.ndarray:
    if mask is None:
        return np.ones(graph.m, dtype=np.uint8)
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if mask.shape != (graph.m,):
        raise ValueError(f"mask must have shape ({graph.m},)")
    return mask


def _compact(graph: BaseGraph, masks: np.ndarray):
    """Relabel vertices touched by any masked edge to 0..k-1."""
    used = np.flatnonzero(masks.any(axis=0)) if masks.size else np.zeros(0, dtype=np.int64)
    verts = np.unique(np.concatenate([graph.eu[used], graph.ev[used]])) if used.size else np.zeros(0, np.int64)
    relabel = np.full(graph.n, -1, dtype=np.int64)
    relabel[verts] = np.arange(verts.size)
    return verts, relabel[graph.eu[used]], relabel[graph.ev[used]], used


# --- vertex cover -----------------------------------------------------------


def exact_min_vertex_cover(graph: BaseGraph, mask=None, limit: int | None = None) -> list[int]:
    """A minimum vertex cover of the masked graph, as a sorted vertex list.

    Raises:
        OracleBudgetError: more than ``limit`` (default ``LIMITS.vc``)
            non-isolated vertices.
    """
    limit = LIMITS.vc if limit is None else limit
    mask = _mask(graph, mask)
    verts, cu, cv, used = _compact(graph, mask[None, :])
    if verts.size > limit:
        raise OracleBudgetError(f"exact vertex cover: {verts.size} non-isolated vertices > limit {limit}")
    if verts.size == 0:
        return []
    sol = kernels.mvc_exact(verts.size, cu, cv, mask[used])
    return sorted(int(verts[i]) for i in np.flatnonzero(sol))


def min_vertex_cover_sizes(graph: BaseGraph, masks, limit: int | None = None) -> np.ndarray:
    """Minimum vertex cover size for each row of ``masks``."""
    limit = LIMITS.vc if limit is None else limit
    masks = np.ascontiguousarray(np.atleast_2d(masks), dtype=np.uint8)
    verts, cu, cv, used = _compact(graph, masks)
    if verts.size > limit:
        raise OracleBudgetError(f"exact vertex cover: {verts.size} non-isolated vertices > limit {limit}")
    if verts.size == 0:
        return np.zeros(masks.shape[0], dtype=np.int64)
    return kernels.mvc_size_batch(verts.size, cu, cv, masks[:, used])


# --- matching ---------------------------------------------------------------


def max_matching(graph: BaseGraph, mask=None) -> list[int]:
    """Edge ids of a maximum-cardinality matching, sorted.

    Deterministic: greedy start in vertex-id order, then augmenting from the
    lowest unmatched vertex id, scanning neighbors in edge-id order.
    """
    mates = kernels.matching_mates(graph.n, graph.eu, graph.ev, _mask(graph, mask))
    return sorted({int(e) for e in mates if e >= 0})


def max_matching_sizes(graph: BaseGraph, masks) -> np.ndarray:
    masks = np.atleast_2d(masks)
    return kernels.matching_batch(graph.n, graph.eu, graph.ev, masks).sum(axis=1).astype(np.int64)


# --- dominating set ---------------------------------------------------------


def exact_min_dominating_set(graph: BaseGraph, mask=None, limit: int | None = None) -> list[int]:
    """A minimum dominating set (isolated vertices dominate themselves)."""
    limit = LIMITS.mds if limit is None else limit
    if graph.n > limit:
        raise OracleBudgetError(f"exact dominating set: n={graph.n} > limit {limit}")
    sol = kernels.mds_exact(graph.n, graph.eu, graph.ev, _mask(graph, mask))
    return [int(v) for v in np.flatnonzero(sol)]


def min_dominating_set_sizes(graph: BaseGraph, masks, limit: int | None = None) -> np.ndarray:
    limit = LIMITS.mds if limit is None else limit
    if graph.n > limit:
        raise OracleBudgetError(f"exact dominating set: n={graph.n} > limit {limit}")
    return kernels.mds_size_batch(graph.n, graph.eu, graph.ev, np.atleast_2d(masks))


# --- fractional vertex cover ------------------------------------------------


@dataclass(frozen=True)
class FractionalVertexCover:
    """Half-integral values; ``twice[v] = 2 * F_v`` is kept exactly as an integer."""

    twice: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.twice.astype(np.float64) / 2.0

    @property
    def total(self) -> float:
        return float(self.twice.sum()) / 2.0

    def check(self, graph: BaseGraph, mask=None) -> None:
        mask = _mask(graph, mask).astype(bool)
        lhs = self.twice[graph.eu[mask]] + self.twice[graph.ev[mask]]
        if np.any(lhs < 2):
            e = int(np.flatnonzero(mask)[np.argmax(lhs < 2)])
            raise AssertionError(f"fractional cover violated on edge {e} {graph.edges[e]}")


def optimal_fractional_vertex_cover(graph: BaseGraph, mask=None) -> FractionalVertexCover:
    """Optimal fractional vertex cover via the bipartite double cover.

    Each vertex gets copies ``(v, 0)`` and ``(v, 1)``; edge ``uv`` becomes
    ``(u,0)-(v,1)`` and ``(v,0)-(u,1)``. A Konig minimum cover ``x`` of that
    bipartite graph gives ``F_v = (x[v,0] + x[v,1]) / 2``, which is optimal and
    half-integral.
    """
    return FractionalVertexCover(kernels.frac_vc2(graph.n, graph.eu, graph.ev, _mask(graph, mask)).astype(np.int64))


def fractional_vc_totals(graph: BaseGraph, masks) -> np.ndarray:
    """Optimal fractional cover value for each row of ``masks``."""
    tw = kernels.frac_vc2_batch(graph.n, graph.eu, graph.ev, np.atleast_2d(masks))
    return tw.sum(axis=1, dtype=np.int64) / 2.0


# --- Monte-Carlo estimators -------------------------------------------------


@dataclass(frozen=True)
class ConditionalF:
    """Paired estimates of ``E[F_x | e realized]`` for both endpoints of each edge.

    ``sum_u[e]`` and ``sum_v[e]`` hold the exact integer sums of ``2 F`` over
    the trials at the lower (``eu``) and higher (``ev``) endpoint, so
    comparisons between the two directions are exact.
    """

    sum_u: np.ndarray
    sum_v: np.ndarray
    sq_u: np.ndarray
    sq_v: np.ndarray
    trials: int

    @property
    def f_u(self) -> np.ndarray:
        return self.sum_u / (2.0 * self.trials)

    @property
    def f_v(self) -> np.ndarray:
        return self.sum_v / (2.0 * self.trials)

    def _stderr(self, s, sq):
        t = self.trials
        if t < 2:
            return np.zeros_like(s, dtype=np.float64)
        mean = s / (2.0 * t)
        var = (sq / 4.0 - t * mean**2) / (t - 1)
        return np.sqrt(np.maximum(var, 0.0) / t)

    @property
    def stderr_u(self) -> np.ndarray:
        return self._stderr(self.sum_u, self.sq_u)

    @property
    def stderr_v(self) -> np.ndarray:
        return self._stderr(self.sum_v, self.sq_v)

    def rows(self, graph: BaseGraph):
        """CSV rows ``edge, v, u, f_vu, stderr`` for both directions of every edge."""
        fu, fv, su, sv = self.f_u, self.f_v, self.stderr_u, self.stderr_v
        for e, (a, b) in enumerate(graph.edges):
            yield (e, a, b, float(fu[e]), float(su[e]))
            yield (e, b, a, float(fv[e]), float(sv[e]))


def estimate_conditional_f(sg: StochasticGraph, trials: int, master_seed: int) -> ConditionalF:
    """Estimate ``f_vu = E[F_v | vu realized]`` with paired sampling.

    For each edge ``e`` the trials draw the other edges independently and force
    ``e`` present; both endpoint values are read off the same optimal
    fractional cover, so ``f_vu + f_uv >= 1`` holds exactly.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    g = sg.graph
    m = g.m
    sum_u = np.zeros(m, dtype=np.int64)
    sum_v = np.zeros(m, dtype=np.int64)
    sq_u = np.zeros(m, dtype=np.int64)
    sq_v = np.zeros(m, dtype=np.int64)
    for e in range(m):
        masks = stream(master_seed, "cond", e).random((trials, m)) < sg.prob
        masks[:, e] = True
        tw = kernels.frac_vc2_batch(g.n, g.eu, g.ev, masks).astype(np.int64)
        a, b = tw[:, g.eu[e]], tw[:, g.ev[e]]
        sum_u[e], sum_v[e] = a.sum(), b.sum()
        sq_u[e], sq_v[e] = (a * a).sum(), (b * b).sum()
    return ConditionalF(sum_u, sum_v, sq_u, sq_v, trials)


@dataclass(frozen=True)
class MatchMarginals:
    """Per-edge frequency in the oracle matching and per-vertex matched frequency."""

    edge: np.ndarray
    edge_stderr: np.ndarray
    vertex: np.ndarray
    vertex_stderr: np.ndarray
    size: MCEstimate

    @property
    def c(self) -> np.ndarray:
        return self.vertex

    def rows_edges(self, graph: BaseGraph):
        for e, (a, b) in enumerate(graph.edges):
            yield (e, a, b, float(self.edge[e]), float(self.edge_stderr[e]))

    def rows_vertices(self):
        for v in range(self.vertex.shape[0]):
            yield (v, float(self.vertex[v]), float(self.vertex_stderr[v]))


def _bernoulli_stderr(freq, t):
    if t < 2:
        return np.zeros_like(freq)
    return np.sqrt(freq * (1.0 - freq) * t / (t - 1) / t)


def estimate_match_marginals(sg: StochasticGraph, trials: int, master_seed: int) -> MatchMarginals:
    """Marginals of the deterministic maximum-matching oracle over realizations.

    Trial ``t`` uses realization seed ``derive_seed(master_seed, "real", t)``.
    ``c_v`` is the sum of the marginals of edges at ``v`` on the same samples,
    so ``sum(c) == 2 * size.mean`` up to float rounding.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    g = sg.graph
    masks = sample_realizations(sg, [derive_seed(master_seed, "real", t) for t in range(trials)])
    ind = kernels.matching_batch(g.n, g.eu, g.ev, masks).astype(np.int64)
    counts = ind.sum(axis=0)
    edge = counts / trials
    vcounts = np.bincount(g.eu, weights=counts, minlength=g.n) + np.bincount(g.ev, weights=counts, minlength=g.n)
    vertex = vcounts / trials
    return MatchMarginals(
        edge,
        _bernoulli_stderr(edge, trials),
        vertex,
        _bernoulli_stderr(np.minimum(vertex, 1.0), trials),
        MCEstimate.from_samples(ind.sum(axis=1)),
    )


def tail_expectation_check(samples, ell: int) -> tuple[Fraction, Fraction]:
    """Both sides of ``E[X 1{X >= l}] = sum_{l' >= l} P(X > l') + l P(X >= l)``.

    Evaluated exactly (rational arithmetic) on the empirical distribution of
    non-negative integer ``samples``.
    """
    xs = [int(x) for x in samples]
    if not xs:
        raise ValueError("need at least one sample")
    if min(xs) < 0:
        raise ValueError("samples must be non-negative integers")
    n = len(xs)
    lhs = Fraction(sum(x for x in xs if x >= ell), n)
    top = max(xs)
    tail = sum(Fraction(sum(1 for x in xs if x > k), n) for k in range(max(ell, 0), top + 1))
    rhs = tail + ell * Fraction(sum(1 for x in xs if x >= ell), n)
    return lhs, rhs


# --- exhaustive cross-checks --------------------------------------------------


def _guard_exhaustive(n, limit):
    limit = LIMITS.exhaustive if limit is None else limit
    if n > limit:
        raise OracleBudgetError(f"exhaustive search: n={n} > limit {limit}")


def _masked_edges(graph, mask):
    mask = _mask(graph, mask)
    return [graph.edges[e] for e in range(graph.m) if mask[e]]


def brute_min_vertex_cover_size(graph: BaseGraph, mask=None, limit: int | None = None) -> int:
    _guard_exhaustive(graph.n, limit)
    edges = _masked_edges(graph, mask)
    for k in range(graph.n + 1):
        for s in itertools.combinations(range(graph.n), k):
            ss = set(s)
            if all(u in ss or v in ss for u, v in edges):
                return k
    return graph.n


def brute_max_matching_size(graph: BaseGraph, mask=None, limit: int | None = None) -> int:
    _guard_exhaustive(graph.n, limit)
    edges = _masked_edges(graph, mask)

    def best(i, used):
        if i == len(edges):
            return 0
        u, v = edges[i]
        skip = best(i + 1, used)
        if not (used >> u & 1 or used >> v & 1):
            return max(skip, 1 + best(i + 1, used | 1 << u | 1 << v))
        return skip

    return best(0, 0)


def brute_min_dominating_set_size(graph: BaseGraph, mask=None, limit: int | None = None) -> int:
    _guard_exhaustive(graph.n, limit)
    closed = [1 << v for v in range(graph.n)]
    for u, v in _masked_edges(graph, mask):
        closed[u] |= 1 << v
        closed[v] |= 1 << u
    full = (1 << graph.n) - 1
    for k in range(graph.n + 1):
        for s in itertools.combinations(range(graph.n), k):
            cov = 0
            for v in s:
                cov |= closed[v]
            if cov == full:
                return k
    return graph.n


def write_csv(path: str | Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)

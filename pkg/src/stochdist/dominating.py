"""Single-round dominating set for stochastic graphs.

Preprocessing ranks the vertices greedily by expected fresh coverage. After
the realization every vertex picks the lowest-ranked vertex in its closed
realized neighborhood and tells it (one bit) that it was selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .engine import ModelViolation, NodeProgram, Protocol, RunTrace
from .graph import Realization, StochasticGraph, max_expected_degree
from .oracles import write_csv

__all__ = [
    "Ranking",
    "rank_vertices",
    "is_dominating_set",
    "MDSProtocol",
    "mds_protocol",
    "mds_selection_batch",
    "MDSDiagnostics",
    "classify_bad_costly",
    "DIAGNOSTICS_HEADER",
]


@dataclass(frozen=True)
class Ranking:
    """Greedy order ``order[i]`` (rank ``i + 1``) and its expected coverage ``wt[i]``."""

    order: tuple[int, ...]
    wt: np.ndarray

    @property
    def rank(self) -> np.ndarray:
        """1-based rank of every vertex."""
        r = np.empty(len(self.order), dtype=np.int64)
        r[list(self.order)] = np.arange(1, len(self.order) + 1)
        return r

    def check(self, tol: float = 1e-12) -> None:
        if np.any(np.diff(self.wt) > tol):
            raise AssertionError("expected coverage along the ranking is not non-increasing")


def rank_vertices(sg: StochasticGraph) -> Ranking:
    """Greedy ranking by expected number of newly covered vertices.

    ``r[u]`` is the chance that ``u`` is not yet covered by the ranked prefix.
    The score of an unranked ``v`` is ``r[v]`` plus ``p_uv * r[u]`` over its
    unranked neighbors ``u``. Ties go to the smaller id. O(n m) overall.
    """
    g = sg.graph
    n = g.n
    eu, ev, p = g.eu, g.ev, sg.prob
    r = np.ones(n)
    ranked = np.zeros(n, dtype=bool)
    order: list[int] = []
    wt = np.empty(n)
    for i in range(n):
        free = ~ranked
        score = r.copy()
        if g.m:
            score += np.bincount(eu, weights=p * r[ev] * free[ev], minlength=n)
            score += np.bincount(ev, weights=p * r[eu] * free[eu], minlength=n)
        score[ranked] = -np.inf
        v = int(np.argmax(score))  # first maximum, i.e. smallest id
        order.append(v)
        wt[i] = score[v]
        ranked[v] = True
        for e, u in zip(g.incident[v], g.neighbors[v]):
            r[u] *= 1.0 - p[e]
    wt.setflags(write=False)
    return Ranking(tuple(order), wt)


def is_dominating_set(sg: StochasticGraph, present: np.ndarray, members) -> bool:
    g = sg.graph
    inside = np.zeros(g.n, dtype=bool)
    inside[list(members)] = True
    dom = inside.copy()
    pr = np.asarray(present, dtype=bool)
    dom[g.eu[pr & inside[g.ev]]] = True
    dom[g.ev[pr & inside[g.eu]]] = True
    return bool(dom.all())


class _MDSNode(NodeProgram):
    done = False

    def __init__(self, view):
        super().__init__(view)
        self.rank = view.payload
        self.selected = False

    def on_start(self):
        best_e, best_r = None, self.rank[self.view.vertex]
        for e, u in self.view.realized:
            if self.rank[u] < best_r:
                best_e, best_r = e, self.rank[u]
        if best_e is None:
            self.selected = True
            return []
        return [(best_e, "1")]

    def on_round(self, r, inbox):
        if inbox:
            self.selected = True
        self.done = True
        return []

    def finish(self):
        return self.selected


def mds_selection_batch(sg: StochasticGraph, ranking: Ranking, masks) -> np.ndarray:
    """Selected-vertex indicator for each realization row of ``masks``."""
    g = sg.graph
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    rank = ranking.rank
    t = masks.shape[0]
    best = np.broadcast_to(rank, (t, g.n)).copy()
    for e in range(g.m):
        u, v = int(g.eu[e]), int(g.ev[e])
        col = masks[:, e]
        best[:, u] = np.where(col, np.minimum(best[:, u], rank[v]), best[:, u])
        best[:, v] = np.where(col, np.minimum(best[:, v], rank[u]), best[:, v])
    order = np.asarray(ranking.order, dtype=np.int64)
    out = np.zeros((t, g.n), dtype=bool)
    rows = np.repeat(np.arange(t), g.n)
    out[rows, order[best.reshape(-1) - 1]] = True
    return out


class MDSProtocol(Protocol):
    """One round: each vertex marks the lowest-ranked vertex of its closed neighborhood."""

    name = "mds-rank"
    message_bits = 1

    def __init__(self, sg: StochasticGraph, ranking: Ranking | None = None):
        self.sg = sg
        self.ranking = ranking if ranking is not None else rank_vertices(sg)
        if len(self.ranking.order) != sg.n:
            raise ValueError("ranking does not match the graph")
        self._rank = [int(x) for x in self.ranking.rank]

    def preprocess(self, sg, seed):
        return [self._rank] * sg.n

    def program(self, view):
        return _MDSNode(view)

    def fast_run(self, sg, realization, seed):
        sel = mds_selection_batch(sg, self.ranking, realization.present[None, :])[0]
        if sg.n == 0:
            return [], RunTrace()
        # everyone whose choice is not itself sends one bit
        g = sg.graph
        rank = self.ranking.rank
        best = rank.copy()
        pr = realization.present
        np.minimum.at(best, g.eu[pr], rank[g.ev[pr]])
        np.minimum.at(best, g.ev[pr], rank[g.eu[pr]])
        msgs = int(np.count_nonzero(best != rank))
        return [bool(x) for x in sel], RunTrace(1, 1 if msgs else 0, msgs, [msgs])

    def validate(self, sg, realization, outputs):
        members = [v for v, x in enumerate(outputs) if x]
        if not is_dominating_set(sg, realization.present, members):
            raise ModelViolation(f"{self.name}: output does not dominate the realization")


def mds_protocol(sg: StochasticGraph, ranking: Ranking | None = None) -> MDSProtocol:
    return MDSProtocol(sg, ranking)


# --- diagnostics ------------------------------------------------------------

DIAGNOSTICS_HEADER = ("rank", "vertex", "w_expected", "w_realized", "bad", "costly", "nu")


@dataclass(frozen=True)
class MDSDiagnostics:
    """Realized coverage per rank and the bad / costly flags.

    Attributes:
        w: realized number of vertices first covered by the rank-i vertex.
        nu: smallest witnessing rank of a costly vertex (0 if not costly).
        delta_bar: the value of the maximum expected degree actually used.
        clamped: True when that value was raised to ``e``.
    """

    order: tuple[int, ...]
    wt: np.ndarray
    w: np.ndarray
    bad: np.ndarray
    costly: np.ndarray
    nu: np.ndarray
    delta_bar: float
    clamped: bool

    @property
    def n_bad(self) -> int:
        return int(self.bad.sum())

    @property
    def n_costly(self) -> int:
        return int(self.costly.sum())

    def rows(self):
        for i, v in enumerate(self.order):
            yield (i + 1, v, float(self.wt[i]), int(self.w[i]), int(self.bad[i]), int(self.costly[i]), int(self.nu[i]))

    def write_csv(self, path: str | Path) -> None:
        write_csv(path, DIAGNOSTICS_HEADER, self.rows())


def classify_bad_costly(
    sg: StochasticGraph,
    ranking: Ranking,
    realization: Realization,
    bad_log: Callable[[float], float] = math.log,
    costly_log: Callable[[float], float] = math.log2,
) -> MDSDiagnostics:
    """Replay the ranking on a realization and flag bad and costly ranks.

    Rank ``i`` is bad if ``w_i < (wt_i - 8 bad_log(D)) / 4``. It is costly if
    some earlier rank ``j`` has ``w_j(v_i) > 6 (ceil(wt_j) + costly_log(D))``,
    where ``w_j(v)`` counts the closed realized neighbors of ``v`` not covered
    by the first ``j - 1`` ranks. ``D`` is the maximum expected degree,
    raised to ``e`` when it is at most 1.
    """
    g = sg.graph
    n = g.n
    rank = ranking.rank
    pr = realization.present
    d = max_expected_degree(sg)
    clamped = d <= 1.0
    if clamped:
        d = math.e
    # first[u]: rank of the vertex that first covers u
    first = rank.copy()
    np.minimum.at(first, g.eu[pr], rank[g.ev[pr]])
    np.minimum.at(first, g.ev[pr], rank[g.eu[pr]])
    w = np.bincount(first - 1, minlength=n)[:n]

    wt = np.asarray(ranking.wt)
    bad = w < (wt - 8.0 * bad_log(d)) / 4.0
    limit = 6.0 * (np.ceil(wt - 1e-9) + costly_log(d))
    costly = np.zeros(n, dtype=bool)
    nu = np.zeros(n, dtype=np.int64)
    nbrs = [[v] for v in range(n)]
    for e in np.flatnonzero(pr):
        nbrs[g.eu[e]].append(int(g.ev[e]))
        nbrs[g.ev[e]].append(int(g.eu[e]))
    for i, v in enumerate(ranking.order):
        if i == 0 or len(nbrs[v]) <= limit.min():
            continue
        # w_j(v) for j = 1..i: closed neighbors whose first cover has rank >= j
        f = np.sort(first[nbrs[v]])
        j = np.arange(1, i + 1)
        wj = len(f) - np.searchsorted(f, j, side="left")
        hit = np.flatnonzero(wj > limit[:i])
        if hit.size:
            costly[i] = True
            nu[i] = int(hit[0]) + 1
    return MDSDiagnostics(tuple(ranking.order), wt, w, bad, costly, nu, float(d), clamped)

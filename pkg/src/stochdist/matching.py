"""Matching algorithms for stochastic graphs.

``TwoRoundMatchingProtocol`` is the two-round proposal scheme: active vertices
hallucinate the unknown part of the realization, match it with the
deterministic oracle and propose along their oracle edge; passive vertices
accept one proposal.

The poly(1/eps) pipeline sparsifies the base graph in preprocessing, drops
vertices of high realized degree and runs ``DistributedMatchingProtocol``, a
randomized maximal matching followed by short augmenting-path phases, on what
is left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .engine import ModelViolation, NodeProgram, Protocol, RunTrace
from .graph import GraphError, Realization, StochasticGraph
from .rng import derive_seed, generator, stream

__all__ = [
    "DEFAULT_ALPHA",
    "ratio_fn",
    "optimal_alpha",
    "assign_sides",
    "hallucinate",
    "TwoRoundMatchingProtocol",
    "two_round_matching_protocol",
    "bipartite_two_round_protocol",
    "check_matching",
    "matching_edges",
    "degree_cap_sparsifier",
    "PrunedInstance",
    "prune_high_degree",
    "DistributedMatchingProtocol",
    "distributed_matching_approx_protocol",
    "PipelineConfig",
    "MatchingPipelineProtocol",
    "matching_polyeps_pipeline",
]

DEFAULT_ALPHA = 0.442854


def ratio_fn(alpha: float) -> float:
    """Guaranteed ratio ``2 (1 - a)(1 - exp(-a))`` of the two-round scheme at activity ``a``."""
    return 2.0 * (1.0 - alpha) * (-math.expm1(-alpha))


def optimal_alpha() -> float:
    """Maximizer of ``ratio_fn`` on (0, 1)."""
    res = minimize_scalar(lambda a: -ratio_fn(a), bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    return float(res.x)


def check_matching(sg: StochasticGraph, present: np.ndarray, mate_edge) -> list[int]:
    """Validate per-vertex matched edges; returns the sorted edge list.

    Raises:
        ModelViolation: an unrealized edge, an edge not incident to its
            vertex, or disagreeing endpoints.
    """
    g = sg.graph
    edges = set()
    for v, e in enumerate(mate_edge):
        if e is None or e < 0:
            continue
        e = int(e)
        if g.eu[e] != v and g.ev[e] != v:
            raise ModelViolation(f"vertex {v} claims non-incident edge {e}", v, e)
        if not present[e]:
            raise ModelViolation(f"vertex {v} matched over unrealized edge {e}", v, e)
        if mate_edge[g.other(e, v)] != e:
            raise ModelViolation(f"edge {e}: endpoints disagree on the matching", v, e)
        edges.add(e)
    return sorted(edges)


def matching_edges(outputs) -> list[int]:
    return sorted({int(e) for e in outputs if e is not None and e >= 0})


# --- two-round matching -----------------------------------------------------


def assign_sides(sg: StochasticGraph, alpha: float, seed: int, bipartite: bool = False) -> np.ndarray:
    """Boolean active mask: independent coins with bias ``alpha``, or the L side."""
    if bipartite:
        if sg.bipartition is None:
            raise GraphError("bipartite variant needs a bipartition")
        sg.bipartition.check(sg.graph)
        return np.array(sg.bipartition.left, dtype=bool)
    return stream(seed, "side", 0).random(sg.n) < alpha


def hallucinate(sg: StochasticGraph, present: np.ndarray, active: np.ndarray, seed: int, v: int) -> np.ndarray:
    """Private sample of the realization for active vertex ``v``.

    Edges from ``v`` to passive neighbors are copied from the truth; all other
    edges are drawn from ``v``'s own stream.
    """
    g = sg.graph
    h = stream(seed, "halluc", v).random(g.m) < sg.prob
    for e, u in zip(g.incident[v], g.neighbors[v]):
        if not active[u]:
            h[e] = present[e]
    return h


class _TwoRoundNode(NodeProgram):
    done = False

    def __init__(self, view, proto):
        super().__init__(view)
        self.proto = proto
        self.active = view.payload
        self.mate = -1

    def on_start(self):
        if not self.active:
            return []
        view = self.view
        sg = view.sg
        g = sg.graph
        v = view.vertex
        act = self.proto._active
        present = np.zeros(g.m, dtype=bool)
        for e, _ in view.realized:
            present[e] = True
        h = hallucinate(sg, present, act, view.seed, v)
        e = int(kernels.matching_mates(g.n, g.eu, g.ev, h)[v])
        if e >= 0 and present[e] and not act[g.other(e, v)]:
            return [(e, "1")]
        return []

    def on_round(self, r, inbox):
        if r == 1:
            if not self.active and inbox:
                e, _, _ = inbox[0]  # lowest sender id
                self.mate = e
                return [(e, "1")]
            return []
        if self.active and inbox:
            self.mate = inbox[0][0]
        self.done = True
        return []

    def finish(self):
        return self.mate


class TwoRoundMatchingProtocol(Protocol):
    """Propose along the hallucinated oracle matching, accept the lowest proposer."""

    message_bits = 1

    def __init__(self, sg: StochasticGraph, alpha: float = DEFAULT_ALPHA, bipartite: bool = False):
        if not bipartite and not (0.0 < alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if bipartite:
            if sg.bipartition is None:
                raise GraphError("bipartite variant needs a bipartition")
            sg.bipartition.check(sg.graph)
        self.sg = sg
        self.alpha = alpha
        self.bipartite = bipartite
        self.name = "match-2round-bip" if bipartite else "match-2round"
        self._active = None

    def preprocess(self, sg, seed):
        self._active = assign_sides(sg, self.alpha, seed, self.bipartite)
        return [bool(a) for a in self._active]

    def program(self, view):
        return _TwoRoundNode(view, self)

    def fast_run(self, sg, realization, seed):
        g = sg.graph
        present = realization.present
        active = assign_sides(sg, self.alpha, seed, self.bipartite)
        act_v = np.flatnonzero(active)
        props: dict[int, list[int]] = {}
        if act_v.size and g.m:
            masks = np.stack([hallucinate(sg, present, active, seed, int(v)) for v in act_v])
            rows = kernels.matching_batch(g.n, g.eu, g.ev, masks)
            for row, v in zip(rows, act_v):
                v = int(v)
                for e, u in zip(g.incident[v], g.neighbors[v]):
                    if row[e]:
                        if present[e] and not active[u]:
                            props.setdefault(u, []).append(v)
                        break
        mate = [-1] * g.n
        n_prop = sum(len(x) for x in props.values())
        for u in sorted(props):
            v = min(props[u])
            e = g.edge_id(u, v)
            mate[u] = mate[v] = e
        n_acc = len(props)
        trace = RunTrace(2, 1 if n_prop else 0, n_prop + n_acc, [n_prop, n_acc]) if g.n else RunTrace()
        return mate, trace

    def validate(self, sg, realization, outputs):
        check_matching(sg, realization.present, outputs)


def two_round_matching_protocol(sg: StochasticGraph, alpha: float = DEFAULT_ALPHA) -> TwoRoundMatchingProtocol:
    return TwoRoundMatchingProtocol(sg, alpha)


def bipartite_two_round_protocol(sg: StochasticGraph) -> TwoRoundMatchingProtocol:
    """All L vertices active, all R vertices passive."""
    return TwoRoundMatchingProtocol(sg, bipartite=True)


# --- sparsify and prune -----------------------------------------------------


def degree_cap_sparsifier(sg: StochasticGraph, cap: int, seed: int) -> np.ndarray:
    """Keep edges in random order while both endpoints have residual capacity.

    Returns a boolean mask over base edge ids; every vertex keeps at most
    ``cap`` edges.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    g = sg.graph
    left = np.full(g.n, int(cap), dtype=np.int64)
    keep = np.zeros(g.m, dtype=bool)
    for e in generator(derive_seed(seed, "sparsify", 0)).permutation(g.m):
        u, v = g.edges[e]
        if left[u] > 0 and left[v] > 0:
            keep[e] = True
            left[u] -= 1
            left[v] -= 1
    assert g.m == 0 or g.degrees(keep).max() <= cap
    return keep


@dataclass(frozen=True)
class PrunedInstance:
    q: np.ndarray
    qstar: np.ndarray
    theta: float
    bad: np.ndarray
    kept: np.ndarray

    @property
    def v_bad(self) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.bad)]


def prune_high_degree(sg: StochasticGraph, q: np.ndarray, realization: Realization, theta: float) -> PrunedInstance:
    """Drop vertices whose realized degree in Q is at least ``theta``."""
    if theta < 1:
        raise ValueError("theta must be >= 1")
    g = sg.graph
    q = np.asarray(q, dtype=bool)
    qstar = q & realization.present
    deg = g.degrees(qstar)
    bad = deg >= theta
    kept = qstar & ~bad[g.eu] & ~bad[g.ev]
    assert g.m == 0 or np.all(g.degrees(kept)[~bad] < theta)
    return PrunedInstance(q, qstar, float(theta), bad, kept)


# --- substitute distributed matching ----------------------------------------


def _bits_for(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


class _Schedule(NamedTuple):
    phases: int
    k: int
    aug_start: list[int]
    total: int


def _schedule(degree_bound: int, delta: float, c: float) -> _Schedule:
    d = max(int(degree_bound), 1)
    phases = math.ceil(c * math.log2(d) + c)
    k = math.ceil(1.0 / delta) - 1
    starts = []
    t = 1 + 4 * phases
    for j in range(1, k + 1):
        starts.append(t)
        t += 3 * (2 * j + 1)
    return _Schedule(phases, k, starts, t)


class _DMNode(NodeProgram):
    """Maximal matching by propose/accept/confirm/announce, then augmenting phases.

    Slot ``s`` is the send step of ``on_round(s)`` (slot 0 is ``on_start``);
    messages sent in slot ``s`` are read in slot ``s + 1``.
    """

    done = False

    def __init__(self, view, proto):
        super().__init__(view)
        self.p = proto
        q = proto.q
        self.q_edges = [(e, u) for e, u in view.realized if q[e]]
        self.bad = len(self.q_edges) >= proto.theta
        self.live: dict[int, int] = {}  # edge -> neighbor
        self.cand: set[int] = set()  # edges to unmatched live neighbors
        self.mate = -1
        self.bits = proto.message_bits
        if not self.q_edges:
            self.done = True

    # helpers
    def _enc(self, x: int) -> str:
        return format(x, f"0{self.bits}b")

    def on_start(self):
        bit = "1" if self.bad else "0"
        return [(e, bit) for e, _ in self.q_edges]

    def on_round(self, r, inbox):
        sch = self.p.schedule
        if r == 1:
            if not self.bad:
                ok = {e for e, _, b in inbox if b == "0"}
                self.live = {e: u for e, u in self.q_edges if e in ok}
                self.cand = set(self.live)
            out = self._slot(r, sch)
        elif self.bad:
            out = []
        else:
            self._receive(r - 1, inbox, sch)
            out = self._slot(r, sch) if r < sch.total else []
        if r >= sch.total:
            self.done = True
        return out

    # --- slot dispatch ---
    def _where(self, s, sch):
        if s < 1 + 4 * sch.phases:
            return "mm", (s - 1) % 4, None
        for j, st in enumerate(sch.aug_start, start=1):
            L = 2 * j + 1
            if st <= s < st + 3 * L:
                return "aug", s - st, j
        return "end", 0, None

    def _slot(self, s, sch):
        kind, step, j = self._where(s, sch)
        if kind == "mm":
            return self._mm_send(step)
        if kind == "aug":
            return self._aug_send(step, j)
        return []

    def _receive(self, s, inbox, sch):
        kind, step, j = self._where(s, sch)
        if kind == "mm":
            self._mm_recv(step, inbox)
        elif kind == "aug":
            self._aug_recv(step, j, inbox)

    # --- maximal matching phase ---
    def _mm_send(self, step):
        if step == 0:
            self.proposed = None
            self.accepted = None
            self.new_match = False
            if self.mate >= 0 or not self.cand:
                return []
            opts = sorted(self.cand, key=lambda e: self.live[e])
            self.proposed = opts[int(self.view.rng.integers(len(opts)))]
            return [(self.proposed, "1")]
        if step == 1:
            if self.mate < 0 and self.proposals:
                self.accepted = self.proposals[0]
                return [(self.accepted, "1")]
            return []
        if step == 2:
            if self.got_accept and (self.accepted is None or self.accepted == self.proposed):
                self.mate = self.proposed
                self.new_match = True
                return [(self.proposed, "1")]
            return []
        # step 3: announce
        if self.new_match:
            return [(e, "1") for e in sorted(self.cand) if e != self.mate]
        return []

    def _mm_recv(self, step, inbox):
        if step == 0:
            self.proposals = [e for e, _, _ in inbox]
        elif step == 1:
            self.got_accept = any(e == self.proposed for e, _, _ in inbox)
        elif step == 2:
            for e, _, _ in inbox:
                if e == self.accepted and self.mate < 0:
                    self.mate = e
                    self.new_match = True
        else:
            for e, _, _ in inbox:
                self.cand.discard(e)
            if self.mate >= 0:
                self.cand.discard(self.mate)

    # --- augmenting phase j: flood, request, flip (each 2j+1 slots) ---
    def _aug_send(self, step, j):
        L = 2 * j + 1
        if step == 0:
            self.claim = None  # (root, parent_edge, via_matching_edge)
            self.cand_end = None  # (step, root, sender, edge)
            self.fwd = None
            self.req_sent = False
            self.req_child = None
            self.flip_pending = None
            # Free vertices split at random into roots (which flood) and
            # endpoints (which wait for a token), so floods from the two ends
            # of a path cannot block each other.
            if self.mate < 0 and self.live and self.view.rng.random() < 0.5:
                self.claim = (self.view.vertex, None, False)
                return [(e, self._enc(self.view.vertex)) for e in sorted(self.live)]
            return []
        if step < L:
            if self.fwd is not None:
                out, self.fwd = self.fwd, None
                return out
            return []
        if step == L:
            c = self.cand_end
            if c is not None:
                self.req_sent = True
                return [(c[3], "1")]
            return []
        if step < 2 * L:
            if self.fwd is not None:
                out, self.fwd = self.fwd, None
                return out
            return []
        # flip slots
        if step == 2 * L and self.claim is not None and self.claim[1] is None and self.req_child is not None:
            self.mate = self.req_child
            return [(self.req_child, "1")]
        if self.flip_pending is not None:
            out, self.flip_pending = self.flip_pending, None
            return out
        return []

    def _aug_recv(self, step, j, inbox):
        L = 2 * j + 1
        if step < L:
            # tokens sent at flood step ``step + 1``
            fstep = step + 1
            toks = sorted((int(b, 2), snd, e) for e, snd, b in inbox)
            for root, snd, e in toks:
                if self.mate < 0:
                    if self.claim is None and self.cand_end is None:
                        self.cand_end = (fstep, root, snd, e)
                    continue
                if self.claim is not None:
                    continue
                via_m = e == self.mate
                self.claim = (root, e, via_m)
                if fstep < L:
                    if via_m:
                        self.fwd = [(x, self._enc(root)) for x in sorted(self.live) if x != self.mate and x != e]
                    else:
                        self.fwd = [(self.mate, self._enc(root))]
                break
        elif step < 2 * L:
            reqs = sorted((snd, e) for e, snd, _ in inbox)
            if not reqs or self.claim is None or self.req_child is not None:
                return
            self.req_child = reqs[0][1]
            if self.claim[1] is not None:
                self.fwd = [(self.claim[1], "1")]
        else:
            for e, _, _ in inbox:
                if self.req_sent and e == self.cand_end[3]:
                    # free endpoint of an accepted path
                    self.mate = e
                    continue
                if self.claim is None or self.claim[1] is None or e != self.claim[1] or self.req_child is None:
                    continue
                out = self.req_child
                self.mate = out if self.claim[2] else e
                self.flip_pending = [(out, "1")]

    def finish(self):
        return self.mate


class DistributedMatchingProtocol(Protocol):
    """Matching on the realized part of ``q`` after dropping vertices of degree >= theta.

    Args:
        q: boolean mask of usable base edges (known in preprocessing).
        theta: degree threshold; vertices with at least this many realized
            ``q`` edges sit out.
        delta: augmenting phases handle paths of length up to
            ``2 (ceil(1/delta) - 1) + 1``.
        c: constant in the number ``ceil(c log2 D + c)`` of maximal-matching
            phases, ``D = ceil(theta) - 1``.
    """

    name = "match-distributed"

    def __init__(self, sg: StochasticGraph, q: np.ndarray, theta: float, delta: float, c: float = 4.0):
        if not (0.0 < delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        if theta < 1:
            raise ValueError("theta must be >= 1")
        self.sg = sg
        self.q = np.asarray(q, dtype=bool)
        self.theta = float(theta)
        self.delta = delta
        self.degree_bound = max(math.ceil(self.theta) - 1, 1)
        self.schedule = _schedule(self.degree_bound, delta, c)
        self.message_bits = _bits_for(sg.n)

    @property
    def round_budget(self) -> int:
        return self.schedule.total

    def program(self, view):
        return _DMNode(view, self)

    def validate(self, sg, realization, outputs):
        check_matching(sg, realization.present & self.q, outputs)


def distributed_matching_approx_protocol(
    sg: StochasticGraph, q: np.ndarray, theta: float, delta: float, c: float = 4.0
) -> DistributedMatchingProtocol:
    return DistributedMatchingProtocol(sg, q, theta, delta, c)


@dataclass(frozen=True)
class PipelineConfig:
    eps: float
    theta: float
    cap: int
    delta: float
    c_a: float
    c: float


class MatchingPipelineProtocol(DistributedMatchingProtocol):
    name = "match-polyeps"

    def __init__(self, sg: StochasticGraph, cfg: PipelineConfig, q: np.ndarray):
        super().__init__(sg, q, cfg.theta, cfg.delta, cfg.c)
        self.cfg = cfg


def matching_polyeps_pipeline(
    sg: StochasticGraph,
    eps: float,
    seed: int,
    theta: float | None = None,
    cap: int | None = None,
    c_a: float = 8.0,
    c: float = 4.0,
) -> MatchingPipelineProtocol:
    """Build the sparsify / prune / distributed-matching pipeline.

    Defaults: ``cap = ceil(c_a / (eps^5 p))``, ``theta = 1 / eps^10`` and
    ``delta = eps / 2``. Run it with ``engine.run``.

    Raises:
        ValueError: ``eps`` outside ``(0, 1/2)`` or non-uniform probabilities.
    """
    if not (0.0 < eps < 0.5):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if not sg.is_uniform():
        raise ValueError("the pipeline requires the same realization probability on every edge")
    p = float(sg.prob[0]) if sg.m else 1.0
    if cap is None:
        cap = math.ceil(c_a / (eps**5 * p))
    if theta is None:
        theta = 1.0 / eps**10
    cfg = PipelineConfig(eps, float(theta), int(cap), eps / 2.0, c_a, c)
    q = degree_cap_sparsifier(sg, cfg.cap, seed)
    return MatchingPipelineProtocol(sg, cfg, q)

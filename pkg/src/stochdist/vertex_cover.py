"""Vertex cover algorithms for stochastic graphs.

Three algorithms live here:

* a zero-round cover in which every vertex owns a set of incident edges and
  joins the cover iff one of them is realized;
* the ordering-based cover (a vertex joins iff it has a realized neighbor later
  in a fixed ordering) together with the sequential random matching process
  used to compare against it;
* a water-filling pipeline: a proportional water-filling fractional matching
  computed in preprocessing, followed by a discretized uniform water-filling
  on the realized edges that survive the bad-vertex filter, run with one-bit
  messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .engine import ModelViolation, NodeProgram, Protocol, RunTrace
from .graph import Realization, StochasticGraph, expected_degrees
from .oracles import ConditionalF
from .rng import generator

__all__ = [
    "EdgeAssociation",
    "build_edge_association",
    "NocommVCProtocol",
    "nocomm_vc_protocol",
    "cover_probability_closed_form",
    "nocomm_cover_batch",
    "default_ordering",
    "ordering_cover",
    "ordering_cover_batch",
    "ordering_cover_expected_size",
    "OrderingCoverProtocol",
    "sequential_random_matching",
    "VCConstants",
    "WaterfillState",
    "waterfilling",
    "realize_chi",
    "DistributedWaterfillingProtocol",
    "distributed_waterfilling_protocol",
    "DWFResult",
    "assemble_dwf",
    "witness_fractional_matching",
    "is_vertex_cover",
]

F_TOL = 1e-9
EVENT_TOL = 1e-12
ACTIVE_TOL = 1e-12


def is_vertex_cover(sg: StochasticGraph, present: np.ndarray, cover) -> bool:
    inc = np.zeros(sg.n, dtype=bool)
    inc[np.asarray(list(cover), dtype=np.int64)] = True
    g = sg.graph
    present = np.asarray(present, dtype=bool)
    return bool(np.all(inc[g.eu[present]] | inc[g.ev[present]]))


def _check_cover(sg, present, cover, what):
    if not is_vertex_cover(sg, present, cover):
        raise ModelViolation(f"{what}: output does not cover every realized edge")


# --- zero-round cover -------------------------------------------------------


@dataclass(frozen=True)
class EdgeAssociation:
    """``owner[e]`` is the vertex responsible for covering edge ``e``."""

    owner: np.ndarray
    n: int

    def edges_of(self, v: int) -> list[int]:
        return [int(e) for e in np.flatnonzero(self.owner == v)]

    def sets(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for e, v in enumerate(self.owner):
            out[int(v)].append(e)
        return out


def build_edge_association(sg: StochasticGraph, condf: ConditionalF) -> EdgeAssociation:
    """Give each edge to the endpoint with the larger conditional fractional value.

    Ties go to the smaller vertex id. Comparisons use the exact integer sums
    stored in ``condf``.
    """
    g = sg.graph
    if condf.sum_u.shape != (g.m,) or condf.sum_v.shape != (g.m,):
        raise ValueError(f"conditional estimates must cover all {g.m} edges")
    # eu < ev always, so a tie keeps the edge at eu.
    owner = np.where(condf.sum_u >= condf.sum_v, g.eu, g.ev).astype(np.int64)
    return EdgeAssociation(owner, g.n)


def cover_probability_closed_form(sg: StochasticGraph, assoc: EdgeAssociation, v: int) -> float:
    """Probability that at least one edge owned by ``v`` is realized."""
    p = sg.prob[assoc.owner == v]
    return float(1.0 - np.prod(1.0 - p))


def nocomm_cover_batch(sg: StochasticGraph, assoc: EdgeAssociation, masks) -> np.ndarray:
    """Cover membership (T x n) for each realization row of ``masks``."""
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    out = np.zeros((masks.shape[0], sg.n), dtype=bool)
    for e in range(sg.m):
        out[:, assoc.owner[e]] |= masks[:, e]
    return out


class _NocommNode(NodeProgram):
    def finish(self):
        own = self.view.payload
        return any(e in own for e, _ in self.view.realized)


class NocommVCProtocol(Protocol):
    """No communication: ``v`` is in the cover iff an edge it owns is realized."""

    name = "vc-nocomm"

    def __init__(self, assoc: EdgeAssociation):
        self.assoc = assoc
        self._sets = [frozenset(s) for s in assoc.sets()]

    def preprocess(self, sg, seed):
        return self._sets

    def program(self, view):
        return _NocommNode(view)

    def fast_run(self, sg, realization, seed):
        out = nocomm_cover_batch(sg, self.assoc, realization.present[None, :])[0]
        return [bool(x) for x in out], RunTrace()

    def validate(self, sg, realization, outputs):
        _check_cover(sg, realization.present, [v for v, x in enumerate(outputs) if x], self.name)


def nocomm_vc_protocol(assoc: EdgeAssociation) -> NocommVCProtocol:
    return NocommVCProtocol(assoc)


# --- ordering-based cover ---------------------------------------------------


def _check_perm(n, order):
    order = [int(v) for v in order]
    if sorted(order) != list(range(n)):
        raise ValueError("ordering must be a permutation of the vertex set")
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    return order, pos


def default_ordering(sg: StochasticGraph) -> list[int]:
    """Descending expected degree, ties by vertex id.

    A plain heuristic; it carries no approximation guarantee.
    """
    d = expected_degrees(sg)
    return sorted(range(sg.n), key=lambda v: (-d[v], v))


def ordering_cover(sg: StochasticGraph, order: Sequence[int], realization: Realization) -> list[int]:
    """Vertices with at least one realized neighbor later in ``order``."""
    _, pos = _check_perm(sg.n, order)
    g = sg.graph
    pr = realization.present
    earlier = np.where(pos[g.eu] < pos[g.ev], g.eu, g.ev)[pr]
    cover = sorted(set(int(v) for v in earlier))
    _check_cover(sg, pr, cover, "ordering cover")
    return cover


def ordering_cover_batch(sg: StochasticGraph, order: Sequence[int], masks) -> np.ndarray:
    _, pos = _check_perm(sg.n, order)
    g = sg.graph
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    earlier = np.where(pos[g.eu] < pos[g.ev], g.eu, g.ev)
    out = np.zeros((masks.shape[0], sg.n), dtype=bool)
    for e in range(sg.m):
        out[:, earlier[e]] |= masks[:, e]
    return out


def ordering_cover_expected_size(sg: StochasticGraph, order: Sequence[int]) -> tuple[float, np.ndarray]:
    """``(sum_i R_i, R)`` where ``R_i`` is the chance ``v_i`` has a realized later neighbor."""
    _, pos = _check_perm(sg.n, order)
    g = sg.graph
    earlier = np.where(pos[g.eu] < pos[g.ev], g.eu, g.ev)
    miss = np.ones(sg.n)
    for e in range(sg.m):
        miss[earlier[e]] *= 1.0 - sg.prob[e]
    r = 1.0 - miss
    r_by_rank = r[np.asarray(list(order), dtype=np.int64)]
    return float(r.sum()), r_by_rank


class _OrderingNode(NodeProgram):
    def finish(self):
        pos = self.view.payload
        me = pos[self.view.vertex]
        return any(pos[u] > me for _, u in self.view.realized)


class OrderingCoverProtocol(Protocol):
    """Zero rounds: join iff some realized neighbor comes later in the ordering."""

    name = "vc-ordering"

    def __init__(self, sg: StochasticGraph, order: Sequence[int] | None = None):
        self.order, pos = _check_perm(sg.n, default_ordering(sg) if order is None else order)
        self._pos = [int(x) for x in pos]

    def preprocess(self, sg, seed):
        return [self._pos] * sg.n

    def program(self, view):
        return _OrderingNode(view)

    def fast_run(self, sg, realization, seed):
        out = ordering_cover_batch(sg, self.order, realization.present[None, :])[0]
        return [bool(x) for x in out], RunTrace()

    def validate(self, sg, realization, outputs):
        _check_cover(sg, realization.present, [v for v, x in enumerate(outputs) if x], self.name)


class SeqMatching(NamedTuple):
    edges: list[int]
    matched_left: np.ndarray
    matched_right: np.ndarray


def sequential_random_matching(
    sg: StochasticGraph, order: Sequence[int], realization: Realization, seed: int
) -> SeqMatching:
    """Scan ``order``; an unmatched vertex picks a uniformly random unmatched later neighbor.

    Flags are indexed by rank: ``matched_left[i]`` means ``order[i]`` matched a
    later vertex, ``matched_right[i]`` that it was matched by an earlier one.
    """
    order, pos = _check_perm(sg.n, order)
    g = sg.graph
    pr = realization.present
    rng = generator(seed)
    mate = [-1] * sg.n
    edges = []
    left = np.zeros(sg.n, dtype=bool)
    right = np.zeros(sg.n, dtype=bool)
    for i, v in enumerate(order):
        if mate[v] != -1:
            continue
        opts = [
            (pos[u], e, u)
            for e, u in zip(g.incident[v], g.neighbors[v])
            if pr[e] and pos[u] > i and mate[u] == -1
        ]
        if not opts:
            continue
        opts.sort()
        _, e, u = opts[int(rng.integers(len(opts)))]
        mate[v], mate[u] = u, v
        edges.append(e)
        left[i] = True
        right[pos[u]] = True
    assert left.sum() == right.sum() == len(edges)
    return SeqMatching(sorted(edges), left, right)


# --- water-filling pipeline -------------------------------------------------


@dataclass(frozen=True)
class VCConstants:
    """Derived constants for accuracy parameter ``eps`` in ``(0, 1/4]``."""

    eps: float

    def __post_init__(self):
        if not (0.0 < self.eps <= 0.25):
            raise ValueError(f"eps must satisfy 0 < eps <= 1/4, got {self.eps}")

    @property
    def eps1(self) -> float:
        return self.eps**3

    @property
    def eps2(self) -> float:
        return self.eps + self.eps**3

    @property
    def eps3(self) -> float:
        return self.eps - self.eps**3

    @property
    def xi(self) -> float:
        return (1.0 + self.eps2) / self.eps1

    @property
    def eps4(self) -> float:
        return 2.0 * self.eps

    @property
    def eps5(self) -> float:
        return self.eps

    @property
    def eps_final(self) -> float:
        e = self.eps
        return (2.0 + e) * (1.0 + 2.0 * e) / (1.0 - e) - 2.0

    @property
    def increment(self) -> float:
        return self.eps3 / self.xi

    @property
    def round_bound(self) -> int:
        return 1 + math.ceil(self.xi / self.eps3)


@dataclass(frozen=True)
class WaterfillState:
    """Fractional matching from proportional water-filling.

    ``scale[e]`` is the frozen common scale of edge ``e``, so
    ``phi[e] == scale[e] * p_e``.
    """

    phi: np.ndarray
    scale: np.ndarray
    phi_v: np.ndarray
    in_f: np.ndarray
    events: int

    @property
    def F(self) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.in_f)]


def waterfilling(sg: StochasticGraph, consts: VCConstants) -> WaterfillState:
    """Raise every active edge weight at rate ``p_e`` until a vertex saturates or the budget is spent.

    Event driven: all active edges share a scale ``s``. Each step jumps ``s``
    to the next vertex saturation or to the budget ``eps1``; saturated
    vertices freeze their incident edges at the current scale.
    """
    g = sg.graph
    n, m = g.n, g.m
    p = sg.prob
    eu, ev = g.eu, g.ev
    budget = consts.eps1
    edge_active = np.ones(m, dtype=bool)
    vert_active = np.ones(n, dtype=bool)
    scale = np.zeros(m)
    frozen = np.zeros(n)  # weight of frozen incident edges
    rate = np.bincount(eu, weights=p, minlength=n) + np.bincount(ev, weights=p, minlength=n)
    s = 0.0
    events = 0
    while edge_active.any():
        events += 1
        live = vert_active & (rate > 0)
        room = np.full(n, np.inf)
        room[live] = (1.0 - (frozen[live] + s * rate[live])) / rate[live]
        v_star = int(np.argmin(room))
        delta = float(room[v_star])
        if budget - s <= delta:
            s = budget
            break
        s += delta
        phi_v = frozen + s * rate
        dead = live & (1.0 - phi_v <= EVENT_TOL)
        dead[v_star] = True
        vert_active &= ~dead
        newly = edge_active & (dead[eu] | dead[ev])
        scale[newly] = s
        w = s * p[newly]
        frozen += np.bincount(eu[newly], weights=w, minlength=n) + np.bincount(ev[newly], weights=w, minlength=n)
        rate -= np.bincount(eu[newly], weights=p[newly], minlength=n) + np.bincount(
            ev[newly], weights=p[newly], minlength=n
        )
        rate[~vert_active] = 0.0
        edge_active &= ~newly
    scale[edge_active] = s
    phi = scale * p
    phi_v = np.bincount(eu, weights=phi, minlength=n) + np.bincount(ev, weights=phi, minlength=n)
    in_f = phi_v >= 1.0 - F_TOL
    return WaterfillState(phi, scale, phi_v, in_f, events)


def _chi_vertex(sg, chi_e, present):
    """Per-vertex realized weight, summed exactly (order independent)."""
    g = sg.graph
    return np.array([math.fsum(chi_e[e] for e in g.incident[v] if present[e]) for v in range(g.n)])


def realize_chi(state: WaterfillState, sg: StochasticGraph, realization: Realization, consts: VCConstants):
    """``(chi_e, chi_v, B, B_plus)`` with B and B+ as boolean vertex masks."""
    present = realization.present
    chi_e = np.where(present, state.phi / sg.prob, 0.0)
    chi_v = _chi_vertex(sg, chi_e, present)
    bad = chi_v >= state.phi_v + consts.eps2
    bad_plus = chi_v >= state.phi_v + consts.eps2 - consts.eps1
    return chi_e, chi_v, bad, bad_plus


def _thresholds(phi_v: np.ndarray, inc: float) -> np.ndarray:
    """Smallest count ``N`` with ``inc * N >= 1 - phi_v - tol`` per vertex."""
    out = np.zeros(phi_v.shape[0], dtype=np.int64)
    for v, b in enumerate(phi_v):
        need = 1.0 - float(b) - ACTIVE_TOL
        if need <= 0.0:
            continue
        k = max(math.ceil(need / inc) - 1, 0)
        while inc * k < need:
            k += 1
        out[v] = k
    return out


class VCNodeOut(NamedTuple):
    in_cover: bool
    in_fb: bool
    bad: bool
    count: int
    edge_counts: dict


class _DWFNode(NodeProgram):
    done = False

    def __init__(self, view):
        super().__init__(view)
        chi_w, phi_v, in_f, thr, eps2 = view.payload
        self.thr = thr
        chi = math.fsum(chi_w[e] for e, _ in view.realized)
        self.bad = chi >= phi_v + eps2
        self.fb = bool(in_f or self.bad)
        self.count = 0
        self.edge_counts: dict[int, int] = {}
        self.active: set[int] = set()
        self.dead = False
        if not view.realized:
            self.done = True

    def on_start(self):
        bit = "1" if self.fb else "0"
        return [(e, bit) for e, _ in self.view.realized]

    def _iterate(self):
        for e in self.active:
            self.edge_counts[e] += 1
        self.count += len(self.active)
        self.dead = self.count >= self.thr
        out = [(e, "0" if self.dead else "1") for e in sorted(self.active)]
        if self.dead:
            self.active = set()
            self.done = True
        return out

    def on_round(self, r, inbox):
        if r == 1:
            if not self.fb:
                clean = {e for e, _, bits in inbox if bits == "0"}
                self.active = {e for e, _ in self.view.realized if e in clean}
                self.edge_counts = {e: 0 for e in self.active}
        else:
            for e, _, bits in inbox:
                if bits == "0":
                    self.active.discard(e)
        if self.done:
            return []
        if not self.active:
            self.done = True
            return []
        return self._iterate()

    def finish(self):
        in_c = self.fb or self.count >= self.thr
        return VCNodeOut(bool(in_c), self.fb, bool(self.bad), self.count, dict(self.edge_counts))


class DistributedWaterfillingProtocol(Protocol):
    """Bad-vertex filter plus discretized water-filling with one-bit messages.

    Round 1 carries each vertex's "in F or B" bit over its realized edges.
    Every later round carries, over each still-active edge, whether the sender
    remains active after the previous increment.
    """

    name = "vc-waterfill"
    message_bits = 1

    def __init__(self, sg: StochasticGraph, state: WaterfillState, consts: VCConstants):
        self.sg = sg
        self.state = state
        self.consts = consts
        self.thresholds = _thresholds(state.phi_v, consts.increment)
        self._chi_w = state.phi / sg.prob
        g = sg.graph
        self._payloads = [
            (
                {e: float(self._chi_w[e]) for e in g.incident[v]},
                float(state.phi_v[v]),
                bool(state.in_f[v]),
                int(self.thresholds[v]),
                consts.eps2,
            )
            for v in range(g.n)
        ]

    def preprocess(self, sg, seed):
        return self._payloads

    def program(self, view):
        return _DWFNode(view)

    def fast_run(self, sg, realization, seed):
        g = sg.graph
        present = realization.present
        chi_e = np.where(present, self._chi_w, 0.0)
        chi_v = _chi_vertex(sg, chi_e, present)
        bad = chi_v >= self.state.phi_v + self.consts.eps2
        fb = self.state.in_f | bad
        qmask = present & ~fb[g.eu] & ~fb[g.ev]
        ecount, vcount, total, seg_len, seg_act = kernels.dwf_events(g.n, g.eu, g.ev, qmask, self.thresholds)
        outputs = []
        for v in range(g.n):
            cnt = int(vcount[v])
            ec = {e: int(ecount[e]) for e in g.incident[v] if qmask[e]} if not fb[v] else {}
            outputs.append(VCNodeOut(bool(fb[v] or cnt >= self.thresholds[v]), bool(fb[v]), bool(bad[v]), cnt, ec))
        trace = RunTrace()
        n_real = int(present.sum())
        if n_real:
            trace.per_round.append(2 * n_real)
            for k, a in zip(seg_len, seg_act):
                trace.per_round.extend([2 * int(a)] * int(k))
            trace.rounds = len(trace.per_round)
            trace.total_messages = int(sum(trace.per_round))
            trace.max_payload_bits = 1
        return outputs, trace

    def validate(self, sg, realization, outputs):
        _check_cover(sg, realization.present, [v for v, o in enumerate(outputs) if o.in_cover], self.name)


def distributed_waterfilling_protocol(
    sg: StochasticGraph, consts: VCConstants, state: WaterfillState | None = None
) -> DistributedWaterfillingProtocol:
    if state is None:
        state = waterfilling(sg, consts)
    return DistributedWaterfillingProtocol(sg, state, consts)


@dataclass
class DWFResult:
    cover: list[int]
    bad: np.ndarray
    in_fb: np.ndarray
    qstar: np.ndarray
    psi: np.ndarray
    psi_v: np.ndarray


def assemble_dwf(sg: StochasticGraph, protocol: DistributedWaterfillingProtocol, outputs) -> DWFResult:
    """Collect per-vertex outputs into cover, B, Q* and psi."""
    g = sg.graph
    inc = protocol.consts.increment
    counts = np.zeros(g.m, dtype=np.int64)
    qstar = np.zeros(g.m, dtype=bool)
    for v, o in enumerate(outputs):
        for e, c in o.edge_counts.items():
            other = outputs[g.other(e, v)].edge_counts.get(e)
            if other is None or other != c:
                raise ModelViolation(f"edge {e}: endpoint counts disagree ({c} vs {other})", v, e)
            counts[e] = c
            qstar[e] = True
    psi = counts * inc
    return DWFResult(
        cover=[v for v, o in enumerate(outputs) if o.in_cover],
        bad=np.array([o.bad for o in outputs], dtype=bool),
        in_fb=np.array([o.in_fb for o in outputs], dtype=bool),
        qstar=qstar,
        psi=psi,
        psi_v=np.array([o.count for o in outputs], dtype=np.float64) * inc,
    )


def witness_fractional_matching(
    sg: StochasticGraph, chi_e: np.ndarray, psi: np.ndarray, bad: np.ndarray, consts: VCConstants, tol: float = 1e-9
) -> np.ndarray:
    """Scaled ``chi + psi`` on edges away from B; asserts it is a fractional matching."""
    g = sg.graph
    keep = ~(bad[g.eu] | bad[g.ev])
    y = np.where(keep, (chi_e + psi) / (1.0 + consts.eps4), 0.0)
    yv = np.bincount(g.eu, weights=y, minlength=g.n) + np.bincount(g.ev, weights=y, minlength=g.n)
    over = np.flatnonzero(yv > 1.0 + tol)
    if over.size:
        v = int(over[0])
        raise AssertionError(f"witness matching infeasible at vertex {v}: load {float(yv[v])!r}")
    return y

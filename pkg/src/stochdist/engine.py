"""Synchronous round executor for the distributed stochastic model.

Preprocessing sees the whole base graph and all probabilities and is not
metered. After the realization is drawn, every vertex runs a NodeProgram that
can only talk over its realized incident edges. Messages emitted in round r
are delivered at the start of round r + 1; messages emitted from ``on_start``
arrive in round 1.
"""

from __future__ import annotations

import json
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .graph import Realization, StochasticGraph, sample_realization
from .rng import derive_seed, generator
from .stats import MCEstimate

__all__ = [
    "ModelViolation",
    "RoundLimitExceeded",
    "TrialError",
    "RunTrace",
    "NodeView",
    "NodeProgram",
    "Protocol",
    "run",
    "run_trial",
    "monte_carlo",
    "MCResult",
]


class ModelViolation(RuntimeError):
    """A node broke the communication model (or an output invariant failed)."""

    def __init__(self, message: str, vertex: int | None = None, edge: int | None = None):
        self.vertex = vertex
        self.edge = edge
        super().__init__(message)


class RoundLimitExceeded(RuntimeError):
    pass


class TrialError(RuntimeError):
    """Wraps an error raised inside Monte-Carlo trial ``trial``."""

    def __init__(self, trial: int, cause: BaseException):
        self.trial = trial
        self.cause = cause
        super().__init__(f"trial {trial}: {type(cause).__name__}: {cause}")


@dataclass
class RunTrace:
    rounds: int = 0
    max_payload_bits: int = 0
    total_messages: int = 0
    per_round: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "max_payload_bits": self.max_payload_bits,
            "total_messages": self.total_messages,
            "per_round": list(self.per_round),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def check(self) -> None:
        if len(self.per_round) != self.rounds or sum(self.per_round) != self.total_messages:
            raise ModelViolation(f"inconsistent trace {self.to_dict()}")


class NodeView:
    """What a vertex knows after realization.

    Attributes:
        vertex: own id.
        realized: ``(edge_id, neighbor)`` pairs of realized incident edges, in
            edge-id order.
        payload: preprocessing output for this vertex.
        sg: the base stochastic graph (known to everyone).
    """

    __slots__ = ("vertex", "realized", "payload", "sg", "_seed", "_rng")

    def __init__(self, vertex, realized, payload, sg, seed):
        self.vertex = vertex
        self.realized = realized
        self.payload = payload
        self.sg = sg
        self._seed = seed
        self._rng = None

    @property
    def rng(self) -> np.random.Generator:
        """Private stream of this vertex for this run."""
        if self._rng is None:
            self._rng = generator(derive_seed(self._seed, "node", self.vertex))
        return self._rng

    @property
    def seed(self) -> int:
        """Protocol seed of this run (shared by all vertices)."""
        return self._seed

    @property
    def degree(self) -> int:
        return len(self.realized)


class NodeProgram:
    """Per-vertex state machine. Subclasses set ``done`` when finished.

    ``on_start`` and ``on_round`` return a list of ``(edge_id, bits)`` where
    ``bits`` is a non-empty string over ``"01"``. ``inbox`` is a list of
    ``(edge_id, sender, bits)`` ordered by sender id then edge id.
    """

    done = True

    def __init__(self, view: NodeView):
        self.view = view

    def on_start(self) -> list:
        return []

    def on_round(self, r: int, inbox: list) -> list:
        return []

    def finish(self) -> Any:
        return None


class Protocol:
    """Distributed algorithm: preprocessing plus one NodeProgram per vertex."""

    #: per-message bit budget enforced by the engine
    message_bits = 1
    name = "protocol"

    def preprocess(self, sg: StochasticGraph, seed: int) -> Sequence[Any] | None:
        return None

    def program(self, view: NodeView) -> NodeProgram:
        return NodeProgram(view)

    def fast_run(self, sg: StochasticGraph, realization: Realization, seed: int):
        """Optional equivalent of ``run`` without per-node stepping; None if unsupported."""
        return None

    def validate(self, sg: StochasticGraph, realization: Realization, outputs: list) -> None:
        """Hard assertion on the run's output; raise ModelViolation on failure."""


def _realized_incidence(sg: StochasticGraph, present: np.ndarray):
    g = sg.graph
    return [tuple((e, g.other(e, v)) for e in g.incident[v] if present[e]) for v in range(g.n)]


def run(
    sg: StochasticGraph,
    realization: Realization,
    protocol: Protocol,
    seed: int,
    max_rounds: int = 100_000,
    fast: bool = True,
) -> tuple[list, RunTrace]:
    """Execute ``protocol`` on one realization.

    Args:
        fast: allow the protocol's ``fast_run`` shortcut when it has one.

    Returns:
        ``(outputs, trace)`` with ``outputs[v]`` the value of ``finish()`` at v.

    Raises:
        ModelViolation: a send over a non-incident or non-realized edge, a
            payload outside the bit budget, or a failed output check.
        RoundLimitExceeded: the protocol did not finish within ``max_rounds``.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative")
    if realization.m != sg.m:
        raise ValueError("realization does not match the base edge set")
    present = realization.present
    if fast:
        res = protocol.fast_run(sg, realization, seed)
        if res is not None:
            outputs, trace = res
            if trace.rounds > max_rounds:
                raise RoundLimitExceeded(f"{protocol.name}: {trace.rounds} rounds > max_rounds={max_rounds}")
            trace.check()
            protocol.validate(sg, realization, outputs)
            return outputs, trace

    g = sg.graph
    eu, ev = g.eu, g.ev
    payloads = protocol.preprocess(sg, seed)
    if payloads is None:
        payloads = [None] * g.n
    inc = _realized_incidence(sg, present)
    nodes = [protocol.program(NodeView(v, inc[v], payloads[v], sg, seed)) for v in range(g.n)]
    trace = RunTrace()
    used = set()
    budget = protocol.message_bits

    def collect(v, msgs, outbox):
        for e, bits in msgs:
            e = int(e)
            if not (0 <= e < g.m) or (eu[e] != v and ev[e] != v):
                raise ModelViolation(f"vertex {v} sent over edge {e}, which is not incident to it", v, e)
            if not present[e]:
                raise ModelViolation(f"vertex {v} sent over edge {e}, which is not realized", v, e)
            if not isinstance(bits, str) or not bits or set(bits) - {"0", "1"}:
                raise ModelViolation(f"vertex {v}: payload on edge {e} is not a bit string", v, e)
            if len(bits) > budget:
                raise ModelViolation(
                    f"vertex {v}: {len(bits)}-bit payload on edge {e} exceeds the {budget}-bit budget", v, e
                )
            to = int(ev[e]) if eu[e] == v else int(eu[e])
            outbox[to].append((e, v, bits))
            used.add(e)
            trace.total_messages += 1
            trace.max_payload_bits = max(trace.max_payload_bits, len(bits))

    outbox = [[] for _ in range(g.n)]
    for v, node in enumerate(nodes):
        collect(v, node.on_start() or (), outbox)
    pending = sum(map(len, outbox))
    while pending or not all(node.done for node in nodes):
        if trace.rounds >= max_rounds:
            raise RoundLimitExceeded(f"{protocol.name}: not finished after max_rounds={max_rounds}")
        trace.rounds += 1
        trace.per_round.append(pending)
        inbox = outbox
        outbox = [[] for _ in range(g.n)]
        for v, node in enumerate(nodes):
            box = sorted(inbox[v], key=lambda x: (x[1], x[0]))
            collect(v, node.on_round(trace.rounds, box) or (), outbox)
        pending = sum(map(len, outbox))

    # Post-run audit: every edge that carried a message is realized.
    for e in used:
        if not present[e]:
            raise ModelViolation(f"audit: message crossed non-realized edge {e}", None, e)
    trace.check()
    outputs = [node.finish() for node in nodes]
    protocol.validate(sg, realization, outputs)
    return outputs, trace


def run_trial(sg, protocol, master_seed: int, t: int, fast: bool = True, max_rounds: int = 100_000):
    """Trial ``t`` of a Monte-Carlo experiment: the derived realization and protocol seeds."""
    real = sample_realization(sg, derive_seed(master_seed, "real", t))
    outputs, trace = run(sg, real, protocol, derive_seed(master_seed, "proto", t), max_rounds, fast)
    return real, outputs, trace


@dataclass
class MCResult:
    estimate: MCEstimate
    values: np.ndarray
    max_rounds: int
    max_payload_bits: int

    @property
    def mean(self) -> float:
        return self.estimate.mean

    @property
    def stderr(self) -> float:
        return self.estimate.stderr

    @property
    def trials(self) -> int:
        return self.estimate.trials


# Fork-inherited job description for worker processes.
_JOB: dict = {}


def _trial_chunk(ts):
    sg, protocol, stat, master, fast, mr = (
        _JOB["sg"], _JOB["protocol"], _JOB["statistic"], _JOB["master"], _JOB["fast"], _JOB["max_rounds"],
    )
    out = []
    for t in ts:
        try:
            real, outputs, trace = run_trial(sg, protocol, master, t, fast, mr)
            out.append((float(stat(outputs)), trace.rounds, trace.max_payload_bits))
        except Exception as exc:
            raise TrialError(t, exc) from exc
    return out


def monte_carlo(
    sg: StochasticGraph,
    protocol: Protocol,
    statistic: Callable[[list], float],
    trials: int,
    master_seed: int,
    workers: int = 1,
    fast: bool = True,
    max_rounds: int = 100_000,
) -> MCResult:
    """Mean and standard error of ``statistic(outputs)`` over independent trials.

    Trial ``t`` uses realization seed ``derive_seed(master_seed, "real", t)`` and
    protocol seed ``derive_seed(master_seed, "proto", t)``. Values are gathered
    in trial order, so the result does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _JOB.update(sg=sg, protocol=protocol, statistic=statistic, master=master_seed, fast=fast, max_rounds=max_rounds)
    try:
        idx = list(range(trials))
        if workers <= 1 or trials < 2:
            rows = _trial_chunk(idx)
        else:
            chunks = [idx[i::workers] for i in range(workers)]
            ctx = mp.get_context("fork")
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                parts = list(pool.map(_trial_chunk, chunks))
            rows = [None] * trials
            for ch, part in zip(chunks, parts):
                for t, row in zip(ch, part):
                    rows[t] = row
    finally:
        _JOB.clear()
    vals = np.array([r[0] for r in rows], dtype=np.float64)
    return MCResult(
        MCEstimate.from_samples(vals),
        vals,
        max(r[1] for r in rows),
        max(r[2] for r in rows),
    )

"""Base graphs, edge realization probabilities and sampled realizations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .rng import generator

__all__ = [
    "GraphError",
    "GraphFormatError",
    "BaseGraph",
    "Bipartition",
    "StochasticGraph",
    "Realization",
    "sample_realization",
    "sample_realizations",
    "expected_degrees",
    "max_expected_degree",
    "generate",
    "load",
    "save",
]


class GraphError(ValueError):
    """A graph, probability vector or generator parameter violates an invariant."""


class GraphFormatError(GraphError):
    """Malformed graph file. ``line`` is 1-based, or None for whole-file errors."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BaseGraph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edge ``i`` is ``edges[i] == (u, v)`` with ``u < v``. Edge ids follow the
    order given at construction and are never reordered.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError("vertex count must be non-negative")
        seen = set()
        for i, (u, v) in enumerate(self.edges):
            if u == v:
                raise GraphError(f"edge {i}: self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise GraphError(f"edge {i}: ({u}, {v}) must satisfy 0 <= u < v < n={self.n}")
            if (u, v) in seen:
                raise GraphError(f"edge {i}: duplicate edge ({u}, {v})")
            seen.add((u, v))

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "BaseGraph":
        """Build from unordered pairs, normalizing each to ``(min, max)``."""
        return cls(n, tuple((min(u, v), max(u, v)) for u, v in pairs))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def eu(self) -> np.ndarray:
        return _readonly(np.array([e[0] for e in self.edges], dtype=np.int64))

    @cached_property
    def ev(self) -> np.ndarray:
        return _readonly(np.array([e[1] for e in self.edges], dtype=np.int64))

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Per-vertex incident edge ids, in increasing edge-id order."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append(i)
            inc[v].append(i)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.other(e, v) for e in self.incident[v]) for v in range(self.n))

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(min(u, v), max(u, v))]

    def other(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return b if a == v else a

    def degrees(self, mask: np.ndarray | None = None) -> np.ndarray:
        w = None if mask is None else np.asarray(mask, dtype=np.float64)
        d = np.bincount(self.eu, weights=w, minlength=self.n) + np.bincount(
            self.ev, weights=w, minlength=self.n
        )
        return d.astype(np.int64)

    def subgraph(self, edge_ids: Iterable[int]) -> "BaseGraph":
        """Spanning subgraph keeping the listed edges (renumbered in id order)."""
        return BaseGraph(self.n, tuple(self.edges[i] for i in sorted(edge_ids)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BaseGraph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))


@dataclass(frozen=True, eq=False)
class Bipartition:
    """``left[v]`` is True for L-side vertices."""

    left: tuple[bool, ...]

    @classmethod
    def from_left_set(cls, n: int, left: Iterable[int]) -> "Bipartition":
        ls = set(left)
        return cls(tuple(v in ls for v in range(n)))

    def check(self, graph: BaseGraph) -> None:
        if len(self.left) != graph.n:
            raise GraphError("bipartition length does not match vertex count")
        for i, (u, v) in enumerate(graph.edges):
            if self.left[u] == self.left[v]:
                raise GraphError(f"edge {i} ({u}, {v}) does not cross the bipartition")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Bipartition) and self.left == other.left


@dataclass(frozen=True, eq=False)
class StochasticGraph:
    """A base graph with per-edge realization probabilities in ``(0, 1]``."""

    graph: BaseGraph
    prob: np.ndarray
    bipartition: Bipartition | None = None

    def __post_init__(self) -> None:
        p = np.array(self.prob, dtype=np.float64).reshape(-1)
        if p.shape[0] != self.graph.m:
            raise GraphError(f"expected {self.graph.m} probabilities, got {p.shape[0]}")
        if not np.all(np.isfinite(p)):
            raise GraphError("probability out of range: non-finite value")
        bad = np.flatnonzero((p <= 0.0) | (p > 1.0))
        if bad.size:
            raise GraphError(f"probability out of range (0, 1] on edge {int(bad[0])}: {p[bad[0]]!r}")
        object.__setattr__(self, "prob", _readonly(p))
        if self.bipartition is not None:
            self.bipartition.check(self.graph)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    def is_uniform(self) -> bool:
        return self.m == 0 or bool(np.all(self.prob == self.prob[0]))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, StochasticGraph)
            and self.graph == other.graph
            and np.array_equal(self.prob, other.prob)
            and self.bipartition == other.bipartition
        )


@dataclass(frozen=True, eq=False)
class Realization:
    """Presence bit per base edge id."""

    present: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "present", _readonly(np.array(self.present, dtype=bool).reshape(-1)))

    @property
    def m(self) -> int:
        return self.present.shape[0]

    def edge_ids(self) -> np.ndarray:
        return np.flatnonzero(self.present)

    def count(self) -> int:
        return int(self.present.sum())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Realization) and np.array_equal(self.present, other.present)


def sample_realization(sg: StochasticGraph, seed: int) -> Realization:
    """Include each edge independently with probability ``p_e``."""
    rng = generator(seed)
    present = rng.random(sg.m) < sg.prob
    r = Realization(present)
    assert r.m == sg.m
    return r


def sample_realizations(sg: StochasticGraph, seeds: Sequence[int]) -> np.ndarray:
    """Stack of presence vectors, row ``t`` equal to ``sample_realization(sg, seeds[t])``."""
    out = np.empty((len(seeds), sg.m), dtype=bool)
    for t, s in enumerate(seeds):
        out[t] = generator(s).random(sg.m) < sg.prob
    return out


def expected_degrees(sg: StochasticGraph) -> np.ndarray:
    g = sg.graph
    return np.bincount(g.eu, weights=sg.prob, minlength=g.n) + np.bincount(
        g.ev, weights=sg.prob, minlength=g.n
    )


def max_expected_degree(sg: StochasticGraph) -> float:
    """Maximum over vertices of the expected realized degree."""
    if sg.n == 0:
        return 0.0
    return float(expected_degrees(sg).max())


# --- generators -------------------------------------------------------------

_KINDS = ("erdos_renyi", "random_bipartite", "star", "path", "complete")


def _probabilities(m: int, rng: np.random.Generator, p: float | None, p_range) -> np.ndarray:
    if (p is None) == (p_range is None):
        raise GraphError("give exactly one of p (uniform_p) or p_range (per_edge_uniform_range)")
    if p is not None:
        if not (0.0 < p <= 1.0):
            raise GraphError(f"probability out of range (0, 1]: {p!r}")
        return np.full(m, float(p))
    lo, hi = map(float, p_range)
    if not (0.0 < lo <= hi <= 1.0):
        raise GraphError(f"probability range must satisfy 0 < low <= high <= 1, got {p_range!r}")
    return lo + (hi - lo) * rng.random(m)


def generate(
    kind: str,
    *,
    seed: int,
    p: float | None = None,
    p_range: tuple[float, float] | None = None,
    **params,
) -> StochasticGraph:
    """Generate a random or structured stochastic graph.

    Args:
        kind: one of ``erdos_renyi`` (``n``, ``density``), ``random_bipartite``
            (``n_left``, ``n_right``, ``density``), ``star`` (``n``; vertex 0 is
            the center), ``path`` (``n``) or ``complete`` (``n``).
        seed: master seed; output is a deterministic function of all arguments.
        p: uniform realization probability for every edge.
        p_range: ``(low, high)``; each edge draws ``p_e`` uniformly from it.

    Raises:
        GraphError: unknown kind or parameters out of range.
    """
    if kind not in _KINDS:
        raise GraphError(f"unknown graph kind {kind!r}; expected one of {', '.join(_KINDS)}")
    rng = generator(seed)
    bip = None
    if kind == "random_bipartite":
        nl, nr = int(params.pop("n_left")), int(params.pop("n_right"))
        density = float(params.pop("density"))
        if nl < 0 or nr < 0 or nl + nr < 1:
            raise GraphError("bipartite sides must be non-negative with at least one vertex")
        if not 0.0 <= density <= 1.0:
            raise GraphError(f"density must lie in [0, 1], got {density}")
        n = nl + nr
        pairs = [(u, v) for u in range(nl) for v in range(nl, n)]
        keep = rng.random(len(pairs)) < density
        edges = [e for e, k in zip(pairs, keep) if k]
        bip = Bipartition(tuple(v < nl for v in range(n)))
    else:
        n = int(params.pop("n"))
        if n < 1:
            raise GraphError("graph must have at least one vertex")
        if kind == "erdos_renyi":
            density = float(params.pop("density"))
            if not 0.0 <= density <= 1.0:
                raise GraphError(f"density must lie in [0, 1], got {density}")
            pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
            keep = rng.random(len(pairs)) < density
            edges = [e for e, k in zip(pairs, keep) if k]
        elif kind == "star":
            edges = [(0, v) for v in range(1, n)]
            bip = Bipartition(tuple(v == 0 for v in range(n)))
        elif kind == "path":
            edges = [(v, v + 1) for v in range(n - 1)]
            bip = Bipartition(tuple(v % 2 == 0 for v in range(n)))
        else:
            edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if params:
        raise GraphError(f"unexpected parameters for {kind}: {sorted(params)}")
    prob = _probabilities(len(edges), rng, p, p_range)
    return StochasticGraph(BaseGraph(n, tuple(edges)), prob, bip)


# --- text format ------------------------------------------------------------


def load(path: str | Path) -> StochasticGraph:
    """Read the ``n m`` / ``u v p`` text format (see README)."""
    text = Path(path).read_text(encoding="utf-8")
    return loads(text)


def loads(text: str) -> StochasticGraph:
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise GraphFormatError("missing header line 'n m'")
    lineno, head = rows[0]
    try:
        n, m = int(head[0]), int(head[1])
        if len(head) != 2 or n < 0 or m < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise GraphFormatError("header must be two non-negative integers 'n m'", lineno) from None

    edges: list[tuple[int, int]] = []
    probs: list[float] = []
    seen: dict[tuple[int, int], int] = {}
    bip = None
    for lineno, tok in rows[1:]:
        if tok[0] == "bipartition":
            if bip is not None:
                raise GraphFormatError("repeated bipartition trailer", lineno)
            try:
                left = [int(x) for x in tok[1:]]
            except ValueError:
                raise GraphFormatError("bipartition entries must be vertex ids", lineno) from None
            if any(not 0 <= x < n for x in left):
                raise GraphFormatError("bipartition vertex out of range", lineno)
            bip = Bipartition.from_left_set(n, left)
            continue
        if bip is not None:
            raise GraphFormatError("edge line after bipartition trailer", lineno)
        if len(tok) != 3:
            raise GraphFormatError("edge line must be 'u v p'", lineno)
        try:
            u, v, p = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError:
            raise GraphFormatError("edge line must be 'u v p'", lineno) from None
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < v < n):
            raise GraphFormatError(f"endpoints must satisfy 0 <= u < v < n, got {u} {v}", lineno)
        if not (math.isfinite(p) and 0.0 < p <= 1.0):
            raise GraphFormatError(f"probability out of range (0, 1]: {tok[2]}", lineno)
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge {u} {v} (first on line {seen[(u, v)]})", lineno)
        seen[(u, v)] = lineno
        edges.append((u, v))
        probs.append(p)
    if len(edges) != m:
        raise GraphFormatError(f"header declares {m} edges but {len(edges)} were given")
    try:
        return StochasticGraph(BaseGraph(n, tuple(edges)), np.array(probs, dtype=np.float64), bip)
    except GraphError as exc:
        raise GraphFormatError(str(exc)) from None


def dumps(sg: StochasticGraph) -> str:
    lines = [f"{sg.n} {sg.m}"]
    lines += [f"{u} {v} {float(p)!r}" for (u, v), p in zip(sg.graph.edges, sg.prob)]
    if sg.bipartition is not None:
        left = [str(v) for v, s in enumerate(sg.bipartition.left) if s]
        lines.append(" ".join(["bipartition", *left]))
    return "\n".join(lines) + "\n"


def save(sg: StochasticGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(sg), encoding="utf-8")

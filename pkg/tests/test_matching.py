import math

import numpy as np
import pytest

from stochdist.engine import ModelViolation, monte_carlo, run
from stochdist.graph import Bipartition, GraphError, Realization, generate, sample_realizations
from stochdist.matching import (
    DEFAULT_ALPHA,
    DistributedMatchingProtocol,
    assign_sides,
    bipartite_two_round_protocol,
    check_matching,
    degree_cap_sparsifier,
    distributed_matching_approx_protocol,
    hallucinate,
    matching_edges,
    matching_polyeps_pipeline,
    optimal_alpha,
    prune_high_degree,
    ratio_fn,
    two_round_matching_protocol,
)
from stochdist.oracles import max_matching
from stochdist.rng import derive_seed

from conftest import make_sg


def full(sg):
    return Realization(np.ones(sg.m, dtype=bool))


def test_ratio_function_values():
    assert ratio_fn(0.5) == pytest.approx(0.393469, abs=1e-6)
    assert ratio_fn(0.0) == 0.0 and ratio_fn(1.0) == 0.0
    a = optimal_alpha()
    assert a == pytest.approx(0.442854, abs=1e-4)
    assert ratio_fn(a) == pytest.approx(0.398693, abs=1e-6)
    assert ratio_fn(DEFAULT_ALPHA) == pytest.approx(ratio_fn(a), abs=1e-9)


def test_two_round_no_realized_edges():
    sg = generate("erdos_renyi", seed=1, n=8, density=0.5, p=0.5)
    proto = two_round_matching_protocol(sg)
    for fast in (True, False):
        out, tr = run(sg, Realization(np.zeros(sg.m, bool)), proto, 3, fast=fast)
        assert matching_edges(out) == []
        assert tr.rounds == 2 and tr.total_messages == 0


def _seed_with_sides(sg, want):
    for s in range(1000):
        if list(assign_sides(sg, DEFAULT_ALPHA, s)) == want:
            return s
    raise AssertionError("no seed found")


def test_two_round_single_edge_active_passive():
    sg = make_sg(2, [(0, 1)], p=1.0)
    proto = two_round_matching_protocol(sg)
    s = _seed_with_sides(sg, [True, False])
    for fast in (True, False):
        out, tr = run(sg, full(sg), proto, s, fast=fast)
        assert out == [0, 0]
        assert tr.rounds == 2 and tr.max_payload_bits == 1 and tr.per_round == [1, 1]


def test_two_round_rejects_bad_alpha():
    sg = make_sg(2, [(0, 1)])
    for a in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            two_round_matching_protocol(sg, a)


def test_two_round_engine_matches_fast_path():
    for i in range(5):
        sg = generate("erdos_renyi", seed=derive_seed(2, "tr", i), n=14, density=0.3, p_range=(0.2, 0.9))
        proto = two_round_matching_protocol(sg)
        for t in range(5):
            r = Realization(sample_realizations(sg, [derive_seed(2, "trr", 10 * i + t)])[0])
            a, ta = run(sg, r, proto, t)
            b, tb = run(sg, r, proto, t, fast=False)
            assert a == b and ta == tb
            assert ta.rounds == 2 and ta.max_payload_bits <= 1
            check_matching(sg, r.present, a)


def test_hallucination_keeps_passive_edges_true():
    sg = generate("erdos_renyi", seed=3, n=10, density=0.5, p=0.5)
    present = sample_realizations(sg, [7])[0]
    active = np.zeros(sg.n, bool)
    active[0] = True
    h = hallucinate(sg, present, active, 11, 0)
    for e in sg.graph.incident[0]:
        assert h[e] == present[e]
    assert np.array_equal(h, hallucinate(sg, present, active, 11, 0))


def test_bipartite_examples():
    sg = make_sg(2, [(0, 1)], p=1.0, bipartition=Bipartition.from_left_set(2, [0]))
    proto = bipartite_two_round_protocol(sg)
    for s in range(5):
        assert run(sg, full(sg), proto, s)[0] == [0, 0]
    k = 6
    star = generate("star", seed=0, n=k + 1, p=1.0)
    proto = bipartite_two_round_protocol(star)
    for s in range(5):
        for fast in (True, False):
            out, tr = run(star, full(star), proto, s, fast=fast)
            assert len(matching_edges(out)) == 1 and tr.rounds == 2


def test_bipartite_needs_bipartition():
    sg = make_sg(3, [(0, 1), (1, 2)])
    with pytest.raises(GraphError):
        bipartite_two_round_protocol(sg)
    with pytest.raises(GraphError, match="does not cross"):
        make_sg(3, [(0, 1), (1, 2)], bipartition=Bipartition.from_left_set(3, [0, 1]))


def test_check_matching_rejects_conflicts():
    sg = make_sg(3, [(0, 1), (1, 2)])
    with pytest.raises(ModelViolation):
        check_matching(sg, np.array([True, True]), [0, 1, 1])
    with pytest.raises(ModelViolation):
        check_matching(sg, np.array([False, True]), [0, 0, -1])
    with pytest.raises(ModelViolation):
        check_matching(sg, np.array([True, True]), [1, -1, 1])
    assert check_matching(sg, np.array([True, True]), [-1, 1, 1]) == [1]


def test_sparsifier_examples():
    sg = generate("erdos_renyi", seed=4, n=20, density=0.3, p=0.5)
    dmax = int(sg.graph.degrees().max())
    assert degree_cap_sparsifier(sg, dmax, 1).all()
    q = degree_cap_sparsifier(sg, 1, 1)
    assert sg.graph.degrees(q).max() <= 1
    # cap 1 gives a maximal matching of G
    covered = sg.graph.degrees(q) > 0
    assert all(covered[u] or covered[v] for u, v in sg.graph.edges)
    assert np.array_equal(q, degree_cap_sparsifier(sg, 1, 1))
    with pytest.raises(ValueError):
        degree_cap_sparsifier(sg, 0, 1)


def test_prune_examples():
    sg = generate("erdos_renyi", seed=5, n=15, density=0.3, p=1.0)
    q = np.ones(sg.m, bool)
    r = full(sg)
    dmax = int(sg.graph.degrees().max())
    assert prune_high_degree(sg, q, r, dmax + 1).v_bad == []
    one = prune_high_degree(sg, q, r, 1)
    assert one.v_bad == [v for v in range(sg.n) if sg.graph.degrees()[v] > 0]
    assert not one.kept.any()
    star = generate("star", seed=0, n=11, p=1.0)
    pr = prune_high_degree(star, np.ones(10, bool), full(star), 5)
    assert pr.v_bad == [0] and not pr.kept.any()
    with pytest.raises(ValueError):
        prune_high_degree(star, np.ones(10, bool), full(star), 0.5)


def test_distributed_matching_single_edge():
    sg = make_sg(2, [(0, 1)], p=1.0)
    proto = distributed_matching_approx_protocol(sg, np.ones(1, bool), theta=4, delta=0.25)
    for s in range(10):
        out, tr = run(sg, full(sg), proto, s, max_rounds=proto.round_budget)
        assert out == [0, 0]
        assert tr.max_payload_bits <= proto.message_bits


def test_distributed_matching_is_valid_and_maximal_on_kept_edges():
    for i in range(6):
        sg = generate("erdos_renyi", seed=derive_seed(6, "dm", i), n=24, density=0.2, p=0.7)
        q = degree_cap_sparsifier(sg, 5, i)
        proto = distributed_matching_approx_protocol(sg, q, theta=5, delta=0.25)
        for t in range(3):
            r = Realization(sample_realizations(sg, [derive_seed(6, "dmr", 10 * i + t)])[0])
            out, tr = run(sg, r, proto, t, max_rounds=proto.round_budget)
            edges = check_matching(sg, r.present & q, out)
            kept = prune_high_degree(sg, q, r, 5).kept
            assert set(edges) <= set(np.flatnonzero(kept).tolist())
            matched = np.zeros(sg.n, bool)
            for e in edges:
                matched[list(sg.graph.edges[e])] = True
            for e in np.flatnonzero(kept):
                u, v = sg.graph.edges[e]
                assert matched[u] or matched[v]
            assert tr.rounds <= proto.round_budget
            assert tr.max_payload_bits <= math.ceil(math.log2(sg.n))


def test_augmentation_finds_longer_paths():
    # path 0-1-2-3: a maximal matching {1-2} has an augmenting path of length 3
    sg = make_sg(4, [(0, 1), (1, 2), (2, 3)], p=1.0)
    q = np.ones(3, bool)
    sizes = []
    for s in range(40):
        proto = DistributedMatchingProtocol(sg, q, theta=3, delta=0.25)
        out, _ = run(sg, full(sg), proto, s, max_rounds=proto.round_budget)
        sizes.append(len(check_matching(sg, np.ones(3, bool), out)))
    assert min(sizes) >= 1 and sizes.count(2) >= 35


def test_distributed_matching_parameter_checks():
    sg = make_sg(2, [(0, 1)])
    with pytest.raises(ValueError):
        DistributedMatchingProtocol(sg, np.ones(1, bool), theta=2, delta=0)
    with pytest.raises(ValueError):
        DistributedMatchingProtocol(sg, np.ones(1, bool), theta=0.5, delta=0.2)


def test_pipeline_complete_graph():
    sg = generate("complete", seed=0, n=8, p=1.0)
    proto = matching_polyeps_pipeline(sg, 0.3, 5)
    out, tr = run(sg, full(sg), proto, 2, max_rounds=proto.round_budget)
    edges = check_matching(sg, np.ones(sg.m, bool), out)
    assert len(edges) == 4
    assert tr.rounds <= proto.round_budget
    again = matching_polyeps_pipeline(sg, 0.3, 5)
    assert run(sg, full(sg), again, 2)[0] == out
    assert proto.cfg.cap == math.ceil(8 / 0.3**5) and proto.cfg.delta == 0.15


def test_pipeline_preconditions():
    sg = generate("complete", seed=0, n=4, p=1.0)
    for eps in (0.5, 0.7, 0.0):
        with pytest.raises(ValueError):
            matching_polyeps_pipeline(sg, eps, 1)
    mixed = generate("complete", seed=0, n=4, p_range=(0.2, 0.9))
    with pytest.raises(ValueError):
        matching_polyeps_pipeline(mixed, 0.3, 1)


def test_two_round_ratio_against_oracle_small():
    sg = generate("erdos_renyi", seed=7, n=16, density=0.3, p=0.6)
    proto = two_round_matching_protocol(sg)
    res = monte_carlo(sg, proto, lambda out: float(len(matching_edges(out))), 2000, 9)
    masks = sample_realizations(sg, [derive_seed(9, "real", t) for t in range(2000)])
    opt = np.mean([len(max_matching(sg.graph, m)) for m in masks])
    assert res.mean / opt >= ratio_fn(DEFAULT_ALPHA) - 4 * res.stderr / opt

from fractions import Fraction

import numpy as np
import pytest

from stochdist import oracles
from stochdist.graph import BaseGraph, generate, sample_realizations
from stochdist.oracles import (
    OracleBudgetError,
    brute_max_matching_size,
    brute_min_dominating_set_size,
    brute_min_vertex_cover_size,
    estimate_conditional_f,
    estimate_match_marginals,
    exact_min_dominating_set,
    exact_min_vertex_cover,
    max_matching,
    optimal_fractional_vertex_cover,
    tail_expectation_check,
)
from stochdist.rng import derive_seed

from conftest import cycle, make_sg

PETERSEN = [(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)] + [(5 + i, 5 + (i + 2) % 5) for i in range(5)]


def graph(n, edges):
    return BaseGraph.from_pairs(n, edges)


def test_vertex_cover_examples():
    assert len(exact_min_vertex_cover(graph(2, [(0, 1)]))) == 1
    assert len(exact_min_vertex_cover(graph(5, cycle(5)))) == 3
    assert exact_min_vertex_cover(graph(4, [])) == []


def test_matching_examples():
    k4 = graph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    assert len(max_matching(k4)) == 2
    assert len(max_matching(graph(6, [(0, v) for v in range(1, 6)]))) == 1
    assert len(max_matching(graph(5, cycle(5)))) == 2


def test_dominating_set_examples():
    assert exact_min_dominating_set(graph(5, [(0, v) for v in range(1, 5)])) == [0]
    assert exact_min_dominating_set(graph(3, [])) == [0, 1, 2]
    assert len(exact_min_dominating_set(graph(6, [(i, i + 1) for i in range(5)]))) == 2


def test_petersen_values_frozen_from_brute_force():
    g = graph(10, PETERSEN)
    assert brute_min_vertex_cover_size(g) == 6
    assert brute_max_matching_size(g) == 5
    assert brute_min_dominating_set_size(g) == 3
    assert len(exact_min_vertex_cover(g)) == 6
    assert len(max_matching(g)) == 5
    assert len(exact_min_dominating_set(g)) == 3
    assert optimal_fractional_vertex_cover(g).total == 5.0


def test_fractional_cover_examples():
    f = optimal_fractional_vertex_cover(graph(2, [(0, 1)]))
    assert list(f.values) == [0.5, 0.5] and f.total == 1.0
    tri = optimal_fractional_vertex_cover(graph(3, cycle(3)))
    assert list(tri.values) == [0.5, 0.5, 0.5] and tri.total == 1.5
    assert optimal_fractional_vertex_cover(graph(3, [])).total == 0.0


def test_fractional_cover_masked_edges_ignored():
    g = graph(3, cycle(3))
    f = optimal_fractional_vertex_cover(g, mask=[1, 0, 0])
    assert f.total == 1.0
    f.check(g, mask=[1, 0, 0])
    with pytest.raises(AssertionError):
        f.check(g)


def test_size_guards():
    big = generate("path", seed=0, n=50, p=1.0).graph
    with pytest.raises(OracleBudgetError):
        exact_min_vertex_cover(big)
    assert len(exact_min_vertex_cover(big, limit=60)) == 25
    with pytest.raises(OracleBudgetError):
        exact_min_dominating_set(graph(30, []))
    with pytest.raises(OracleBudgetError):
        brute_min_vertex_cover_size(graph(13, []))
    old = oracles.LIMITS.vc
    oracles.LIMITS.vc = 3
    try:
        with pytest.raises(OracleBudgetError):
            exact_min_vertex_cover(graph(5, cycle(5)))
    finally:
        oracles.LIMITS.vc = old


def test_isolated_vertices_do_not_count_against_vc_guard():
    g = graph(100, [(0, 1)])
    assert len(exact_min_vertex_cover(g)) == 1


def test_conditional_f_single_edge_is_half():
    for p in (0.1, 0.9):
        est = estimate_conditional_f(make_sg(2, [(0, 1)], p=p), 50, 1)
        assert est.f_u[0] == 0.5 and est.f_v[0] == 0.5


def test_conditional_f_star_center_dominates():
    sg = make_sg(6, [(0, v) for v in range(1, 6)], p=1.0)
    est = estimate_conditional_f(sg, 20, 2)
    assert np.all(est.f_u >= est.f_v)
    assert np.all(est.sum_u + est.sum_v >= 2 * est.trials)


def test_conditional_f_pairs_sum_to_at_least_one():
    sg = generate("erdos_renyi", seed=5, n=10, density=0.4, p_range=(0.2, 0.9))
    est = estimate_conditional_f(sg, 200, 3)
    # exact integer comparison: 2F sums over the same trials
    assert np.all(est.sum_u + est.sum_v >= 2 * est.trials)
    rows = list(est.rows(sg.graph))
    assert len(rows) == 2 * sg.m


def test_conditional_f_rejects_zero_trials():
    with pytest.raises(ValueError):
        estimate_conditional_f(make_sg(2, [(0, 1)]), 0, 1)


def test_match_marginals_single_edge():
    T = 20_000
    mm = estimate_match_marginals(make_sg(2, [(0, 1)], p=0.7), T, 4)
    se = np.sqrt(0.7 * 0.3 / T)
    assert abs(mm.c[0] - 0.7) <= 4 * se and mm.c[0] == mm.c[1]
    one = estimate_match_marginals(make_sg(2, [(0, 1)], p=1.0), 100, 4)
    assert list(one.c) == [1.0, 1.0]


def test_match_marginals_double_counting():
    sg = generate("erdos_renyi", seed=6, n=12, density=0.3, p=0.5)
    mm = estimate_match_marginals(sg, 500, 8)
    assert mm.c.sum() == pytest.approx(2 * mm.size.mean, abs=1e-9)


def test_tail_expectation_examples():
    assert tail_expectation_check([3, 3, 3], 0) == (3, 3)
    assert tail_expectation_check([3], 5) == (0, 0)
    assert tail_expectation_check([0, 1, 2], 1) == (1, 1)
    lhs, rhs = tail_expectation_check([0, 0, 1, 4, 7, 2], 2)
    assert lhs == rhs == Fraction(13, 6)
    with pytest.raises(ValueError):
        tail_expectation_check([1, -1], 0)


def test_oracles_agree_with_brute_force_on_random_suite(each_backend):
    for i in range(30):
        sg = generate("erdos_renyi", seed=derive_seed(9, "orc", i), n=1 + i % 12, density=0.35, p=0.7)
        g = sg.graph
        for row in sample_realizations(sg, [derive_seed(9, "orr", 3 * i + t) for t in range(3)]):
            vc = len(exact_min_vertex_cover(g, row))
            mm = len(max_matching(g, row))
            fr = optimal_fractional_vertex_cover(g, row)
            fr.check(g, row)
            assert vc == brute_min_vertex_cover_size(g, row)
            assert mm == brute_max_matching_size(g, row)
            assert len(exact_min_dominating_set(g, row)) == brute_min_dominating_set_size(g, row)
            assert mm <= fr.total <= vc

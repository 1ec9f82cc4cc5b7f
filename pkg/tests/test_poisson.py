import math

import numpy as np
import pytest

from stochdist.poisson import (
    BOUND,
    evaluate_point,
    feasible_perturbations,
    lambda_boundaries,
    lambda_of_p,
    minimize_ratio,
    pmf,
    ratio_curve,
    threshold_bound_check,
)

LN2 = math.log(2)


def test_lambda_of_p_examples():
    assert lambda_of_p(0.5) == pytest.approx(LN2, abs=1e-12)
    assert abs(lambda_of_p(1e-9) - 1e-9) <= 1e-9
    for bad in (1.0, 0.0, -0.1, 1.2):
        with pytest.raises(ValueError):
            lambda_of_p(bad)


def test_lambda_of_p_inverts_exactly():
    for p in np.linspace(0.001, 0.999, 999):
        assert abs(math.exp(-lambda_of_p(p)) - (1 - p)) <= 1e-12


def test_point_at_ln2():
    pt = evaluate_point(LN2)
    assert pt.m == 0
    assert pt.beta == pytest.approx(1.0, abs=1e-12)
    assert pt.exp_f == pytest.approx(0.5 - LN2 / 2, abs=1e-12)
    assert pt.exp_f == pytest.approx(0.153426, abs=1e-6)


def test_point_small_lambda():
    lam = 1e-6
    pt = evaluate_point(lam)
    assert pt.m == 0
    # F* puts weight 1 - beta on Y = 1 and 1 above, and E[F* Y] = lam / 2
    assert abs(pt.exp_f - (1 - math.exp(-lam) - lam / 2)) <= 1e-6
    assert pt.ratio == pytest.approx(0.5, abs=1e-5)


def test_point_invariants_on_random_means():
    rng = np.random.default_rng(42)
    for lam in rng.uniform(1e-4, 40.0, 100):
        pt = evaluate_point(lam)
        assert 0 < pt.beta <= 1
        assert abs(pt.exp_fy - lam / 2) <= 1e-9
        q = pmf(lam, pt.m + 2)
        assert abs(math.fsum(q[: pt.m]) + pt.beta * q[pt.m] - 0.5) <= 1e-12
        assert pt.ratio >= 1 / BOUND


def test_point_rejects_non_positive():
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(ValueError):
            evaluate_point(bad)


def test_pmf_large_mean_is_finite_and_normalized():
    q = pmf(700.0)
    assert all(math.isfinite(x) for x in q)
    assert math.fsum(q) == pytest.approx(1.0, abs=1e-12)


def test_boundaries():
    b = lambda_boundaries(4)
    assert b[0] == pytest.approx(LN2, abs=1e-15)
    assert all(x < y for x, y in zip(b, b[1:]))
    for i, lam in enumerate(b[1:], start=1):
        assert math.fsum(pmf(lam, i)[: i + 1]) == pytest.approx(0.5, abs=1e-12)
        assert i < lam < i + 1
    with pytest.raises(ValueError):
        lambda_boundaries(0)


def test_median_changes_at_boundaries():
    b = lambda_boundaries(4)
    for i, lam in enumerate(b):
        assert evaluate_point(lam * (1 - 1e-6)).m == i
        assert evaluate_point(lam * (1 + 1e-6)).m == i + 1


def test_minimum():
    mn = minimize_ratio()
    assert mn.lam == pytest.approx(1.678347, abs=1e-4)
    assert mn.ratio == pytest.approx(1 / 3.43068, abs=1e-5)
    assert mn.lam == pytest.approx(lambda_boundaries(2)[1], abs=1e-9)


def test_grid_bound_holds_on_0_20():
    grid = np.linspace(20 / 100_000, 20, 100_000)
    c = ratio_curve(grid)
    assert np.all(c.ratio >= 1 / BOUND)
    assert np.all(np.abs(c.exp_fy - c.lam / 2) <= 1e-9)


def test_vectorized_curve_matches_scalar():
    lams = [1e-3, 0.3, LN2 * 1.01, 1.678347, 3.2, 9.9, 19.5]
    c = ratio_curve(lams)
    for i, lam in enumerate(lams):
        pt = evaluate_point(lam)
        assert c.m[i] == pt.m
        assert c.ratio[i] == pytest.approx(pt.ratio, abs=1e-12)
    with pytest.raises(ValueError):
        ratio_curve([1.0, 0.0])


def test_threshold_check_examples():
    assert threshold_bound_check(1.0, [np.ones(5)])
    pt = evaluate_point(1.678347)
    star = np.zeros(pt.m + 2)
    star[pt.m + 1] = 1 - pt.beta
    assert threshold_bound_check(1.678347, [star])
    assert pt.ratio == pytest.approx(1 / 3.43068, abs=1e-5)


def test_threshold_check_rejects_infeasible_profiles():
    with pytest.raises(ValueError, match="infeasible"):
        threshold_bound_check(2.0, [np.zeros(30)])
    with pytest.raises(ValueError):
        threshold_bound_check(2.0, [np.full(5, 1.5)])


def test_perturbation_audit():
    rng = np.random.default_rng(7)
    for lam in (0.2, LN2, 1.0, 1.678347, 2.5, 6.0):
        cands = feasible_perturbations(lam, 200, rng)
        assert threshold_bound_check(lam, cands)

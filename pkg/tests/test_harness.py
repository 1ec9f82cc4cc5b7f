import csv
import dataclasses

import numpy as np
import pytest

from stochdist.engine import run_trial
from stochdist.graph import generate, save
from stochdist.harness import (
    CRITERIA,
    RESULT_HEADER,
    ConfigError,
    CriterionResult,
    ExperimentConfig,
    ResultRow,
    LeakyProtocol,
    build_protocol,
    load_instances,
    paired_masks,
    parse_kv,
    pruning_factor,
    ratio_report,
    write_rows,
)
from stochdist.oracles import OracleBudgetError
from stochdist.rng import derive_seed


def cfg(**kw):
    pairs = [(k, str(v)) for k, v in kw.items()]
    return ExperimentConfig.from_pairs(pairs)


def test_parse_kv_comments_and_errors():
    assert list(parse_kv("# c\nseed = 3\n\nn=5 # five\n")) == [("seed", "3"), ("n", "5")]
    with pytest.raises(ConfigError, match="line 2"):
        list(parse_kv("seed=1\nnonsense\n"))


def test_config_from_text_and_overrides():
    c = ExperimentConfig.from_text("algorithm=vc-ordering\nseed=4\nn=12\n", ["n=9", "p-lo=0.2", "p_hi=0.6"])
    assert c.algorithm == "vc-ordering" and c.seed == 4 and c.n == 9
    assert (c.p_lo, c.p_hi) == (0.2, 0.6)
    assert ExperimentConfig.from_text(c.to_text()) == c


@pytest.mark.parametrize(
    "kw, msg",
    [
        (dict(algorithm="vc-nocomm"), "seed"),
        (dict(seed=1, algorithm="nope"), "unknown algorithm"),
        (dict(seed=1, colour="red"), "unknown config key"),
        (dict(seed=1, n="ten"), "cannot parse"),
        (dict(seed=1, algorithm="vc-waterfill", eps=0.3), "eps <= 1/4"),
        (dict(seed=1, algorithm="vc-waterfill"), "eps"),
        (dict(seed=1, algorithm="match-polyeps", eps=0.5), "eps < 1/2"),
        (dict(seed=1, algorithm="match-2round", alpha=1.0), "alpha"),
        (dict(seed=1, baseline="fractional", algorithm="mds-rank"), "fractional"),
        (dict(seed=1, baseline="greedy"), "baseline"),
        (dict(seed=1, trials=0), "positive"),
    ],
)
def test_config_errors(kw, msg):
    with pytest.raises(ConfigError, match=msg):
        cfg(**kw)


def test_instances_are_seeded(tmp_path):
    c = cfg(seed=3, instances=3, n=10, density=0.4)
    a, b = load_instances(c), load_instances(c)
    assert [x[0] for x in a] == ["erdos_renyi-0", "erdos_renyi-1", "erdos_renyi-2"]
    assert all(x[1] == y[1] for x, y in zip(a, b))
    assert a[0][1] != a[1][1]
    path = tmp_path / "mine.graph"
    save(a[0][1], path)
    got = load_instances(cfg(seed=3, graph=path))
    assert got == [("mine", a[0][1])]
    with pytest.raises(ConfigError):
        load_instances(cfg(seed=3, p_lo=0.2))


def test_paired_masks_reproduce_trials():
    sg = generate("erdos_renyi", seed=1, n=10, density=0.4, p=0.5)
    master = derive_seed(5, "trials", 0)
    masks = paired_masks(sg, master, 6)
    for t in range(6):
        real, _, _ = run_trial(sg, build_protocol(cfg(seed=5, algorithm="vc-ordering"), sg)[0], master, t)
        assert np.array_equal(real.present, masks[t])


@pytest.mark.parametrize("alg", ["oracle-vc", "oracle-matching", "oracle-mds"])
def test_oracle_self_comparison(alg):
    rows = ratio_report(cfg(seed=2, algorithm=alg, n=12, trials=200))
    assert len(rows) == 1
    r = rows[0]
    assert r.ratio == 1.0 and r.ratio_stderr == 0.0 and r.diff_stderr == 0.0
    assert r.rounds == 0 and r.max_bits == 0


@pytest.mark.parametrize(
    "kw, low, high",
    [
        (dict(algorithm="vc-nocomm", f_trials=200), 1.0, 3.44),
        (dict(algorithm="vc-nocomm", f_trials=200, baseline="fractional"), 1.0, 3.44),
        (dict(algorithm="vc-ordering"), 1.0, 10.0),
        (dict(algorithm="vc-waterfill", eps=0.25), 1.0, 4.5),
        (dict(algorithm="match-2round"), 0.398693, 1.0),
        (dict(algorithm="match-polyeps", eps=0.3), 0.5, 1.0),
        (dict(algorithm="mds-rank"), 1.0, 10.0),
    ],
)
def test_ratio_report_algorithms(kw, low, high):
    rows = ratio_report(cfg(seed=7, n=14, density=0.25, trials=300, **kw))
    r = rows[0]
    assert low - 4 * r.ratio_stderr <= r.ratio <= high + 4 * r.ratio_stderr
    assert r.trials == 300 and r.max_bits >= 0


def test_ratio_report_bipartite_and_workers():
    base = dict(seed=8, algorithm="match-2round-bip", kind="random_bipartite", n_left=6, n_right=7, trials=150)
    one = ratio_report(cfg(**base))
    two = ratio_report(cfg(workers=2, **base))
    assert [r.key() for r in one] == [r.key() for r in two]
    assert one[0].rounds == 2 and one[0].max_bits == 1
    assert one[0].ratio >= 1 - 1 / np.e - 4 * one[0].ratio_stderr
    with pytest.raises(ConfigError, match="bipartite"):
        ratio_report(cfg(seed=8, algorithm="match-2round-bip", kind="erdos_renyi", trials=10))


def test_ratio_report_is_deterministic(tmp_path):
    c = cfg(seed=9, algorithm="vc-ordering", instances=2, trials=100)
    a, b = ratio_report(c), ratio_report(c)
    assert [r.key() for r in a] == [r.key() for r in b]
    path = tmp_path / "rows.csv"
    write_rows(path, a)
    rows = list(csv.reader(open(path)))
    assert tuple(rows[0]) == RESULT_HEADER and len(rows) == 3


def test_exact_baseline_refuses_large_instances():
    with pytest.raises(OracleBudgetError):
        ratio_report(cfg(seed=1, algorithm="mds-rank", n=30, trials=5))


def test_pruning_factor():
    assert pruning_factor(8) == 0.0 and pruning_factor(5) == 0.0
    assert pruning_factor(20) == pytest.approx(1 - 16 / (9 * 20 * (1 - 8 / 20)))
    assert 0 <= pruning_factor(10) < pruning_factor(100) < 1


def test_leaky_protocol_is_caught():
    from stochdist.engine import ModelViolation, run
    from stochdist.graph import Realization

    sg = generate("path", seed=0, n=4, p=0.5)
    with pytest.raises(ModelViolation):
        run(sg, Realization(np.zeros(sg.m, bool)), LeakyProtocol(), 1)


def test_criterion_result_line():
    r = CriterionResult(3, "title", True, "ok", 1.25)
    assert r.line() == "[PASS] criterion 3: title -- ok (1.2s)"
    assert CriterionResult(4, "t", False, "bad").line().startswith("[FAIL] criterion 4")


def test_registered_criteria_have_titles():
    for k, (title, fn) in CRITERIA.items():
        assert title and callable(fn)


def test_result_row_key_drops_wall_time():
    a = ResultRow("g", "vc-ordering", 1.0, 0.1, 1.0, 0.1, 1.0, 0.0, 0.0, 0, 0, 10, 0.5)
    b = dataclasses.replace(a, wall_time=9.0)
    assert a.key() == b.key() and len(a.key()) == len(RESULT_HEADER) - 1

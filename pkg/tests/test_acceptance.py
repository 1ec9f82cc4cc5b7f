"""Acceptance gate: one test per registered criterion.

Each test runs the criterion at its full scale, prints its pass/fail line and
asserts it passed. The meta-test guards the registry itself.
"""

import pytest

from stochdist.harness import ACCEPT_SEED, CRITERIA

EXPECTED = 10


def _run(number, capsys):
    res = CRITERIA[number][1](ACCEPT_SEED)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.number == number
    assert res.passed, res.line()


def test_criterion_01_poisson_minimum(capsys):
    _run(1, capsys)


def test_criterion_02_poisson_global_bound(capsys):
    _run(2, capsys)


@pytest.mark.slow
def test_criterion_03_zero_round_vertex_cover(capsys):
    _run(3, capsys)


@pytest.mark.slow
def test_criterion_04_ordering_cover_identity(capsys):
    _run(4, capsys)


@pytest.mark.slow
def test_criterion_05_waterfilling_vertex_cover(capsys):
    _run(5, capsys)


@pytest.mark.slow
def test_criterion_06_two_round_matching(capsys):
    _run(6, capsys)


@pytest.mark.slow
def test_criterion_07_matching_pipeline(capsys):
    _run(7, capsys)


@pytest.mark.slow
def test_criterion_08_dominating_set(capsys):
    _run(8, capsys)


@pytest.mark.slow
def test_criterion_09_oracle_correctness(capsys):
    _run(9, capsys)


def test_criterion_10_model_enforcement_and_determinism(capsys):
    _run(10, capsys)


def test_every_criterion_is_registered():
    assert len(CRITERIA) == EXPECTED
    assert sorted(CRITERIA) == list(range(1, EXPECTED + 1))
    tested = {int(name.split("_")[2]) for name in globals() if name.startswith("test_criterion_")}
    assert tested == set(CRITERIA)

import numpy as np
import pytest

from stochdist.graph import (
    BaseGraph,
    Bipartition,
    GraphError,
    GraphFormatError,
    Realization,
    dumps,
    expected_degrees,
    generate,
    load,
    loads,
    max_expected_degree,
    sample_realization,
    sample_realizations,
    save,
)
from stochdist.rng import derive_seed, generator, stream

from conftest import make_sg


def test_base_graph_rejects_self_loop_and_parallel_edges():
    with pytest.raises(GraphError):
        BaseGraph(3, ((1, 1),))
    with pytest.raises(GraphError):
        BaseGraph(3, ((0, 1), (0, 1)))
    with pytest.raises(GraphError):
        BaseGraph(3, ((0, 3),))


def test_adjacency_matches_edge_list():
    g = BaseGraph.from_pairs(4, [(2, 0), (1, 2), (2, 3)])
    assert g.edges == ((0, 2), (1, 2), (2, 3))
    assert g.incident[2] == (0, 1, 2)
    assert sorted(g.neighbors[2]) == [0, 1, 3]
    assert g.edge_id(2, 1) == 1
    assert g.other(2, 3) == 2


def test_probability_zero_rejected():
    with pytest.raises(GraphError, match="probability out of range"):
        make_sg(2, [(0, 1)], p=0.0)
    with pytest.raises(GraphError):
        make_sg(2, [(0, 1)], p=float("nan"))


def test_all_p_one_realizes_everything():
    sg = generate("complete", seed=3, n=6, p=1.0)
    assert sample_realization(sg, 12345).present.all()


def test_empty_edge_set_realization():
    sg = make_sg(3, [])
    r = sample_realization(sg, 1)
    assert r.m == 0 and r.count() == 0


def test_realization_is_immutable_and_seeded():
    sg = generate("erdos_renyi", seed=1, n=15, density=0.4, p=0.5)
    a, b = sample_realization(sg, 99), sample_realization(sg, 99)
    assert a == b
    with pytest.raises(ValueError):
        a.present[0] = not a.present[0]
    rows = sample_realizations(sg, [99, 100])
    assert np.array_equal(rows[0], a.present)


def test_star_mean_realized_degree():
    sg = generate("star", seed=0, n=101, p=0.5)
    masks = sample_realizations(sg, [derive_seed(5, "star", t) for t in range(100_000)])
    deg = masks.sum(axis=1)
    # binomial(100, 1/2): sd of the mean is 5 / sqrt(T)
    assert abs(deg.mean() - 50) <= 3 * 5 / np.sqrt(deg.size)


def test_edge_frequencies_match_probabilities():
    sg = generate("erdos_renyi", seed=11, n=8, density=0.6, p_range=(0.1, 0.95))
    T = 100_000
    masks = sample_realizations(sg, [derive_seed(2, "freq", t) for t in range(T)])
    freq = masks.mean(axis=0)
    p = sg.prob
    assert np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / T))


def test_expected_degrees_examples():
    tri = make_sg(3, [(0, 1), (0, 2), (1, 2)], p=0.5)
    assert np.allclose(expected_degrees(tri), 1.0)
    assert max_expected_degree(tri) == pytest.approx(1.0)
    iso = make_sg(2, [])
    assert list(expected_degrees(iso)) == [0.0, 0.0]
    path = make_sg(3, [(0, 1), (1, 2)], p=[0.3, 0.9])
    assert max_expected_degree(path) == pytest.approx(1.2)
    assert int(np.argmax(expected_degrees(path))) == 1


def test_generate_examples():
    star = generate("star", seed=4, n=5, p=1.0)
    assert star.graph.edges == ((0, 1), (0, 2), (0, 3), (0, 4))
    assert np.all(star.prob == 1.0)
    with pytest.raises(GraphError):
        generate("erdos_renyi", seed=1, n=0, density=0.5, p=0.5)
    a = generate("erdos_renyi", seed=7, n=30, density=0.2, p_range=(0.2, 0.8))
    b = generate("erdos_renyi", seed=7, n=30, density=0.2, p_range=(0.2, 0.8))
    assert a == b
    assert np.all((a.prob >= 0.2) & (a.prob <= 0.8))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="erdos_renyi", n=5, density=1.5, p=0.5),
        dict(kind="erdos_renyi", n=5, density=0.5, p=1.2),
        dict(kind="erdos_renyi", n=5, density=0.5, p_range=(0.6, 0.2)),
        dict(kind="erdos_renyi", n=5, density=0.5),
        dict(kind="hypercube", n=5, p=0.5),
        dict(kind="path", n=5, p=0.5, density=0.1),
    ],
)
def test_generate_rejects_bad_params(kwargs):
    kind = kwargs.pop("kind")
    with pytest.raises(GraphError):
        generate(kind, seed=1, **kwargs)


def test_bipartite_generator_carries_bipartition():
    sg = generate("random_bipartite", seed=2, n_left=4, n_right=5, density=0.5, p=0.7)
    assert sg.bipartition is not None
    sg.bipartition.check(sg.graph)
    assert sum(sg.bipartition.left) == 4


def test_bipartition_check_rejects_same_side_edge():
    g = BaseGraph(3, ((0, 1), (1, 2)))
    with pytest.raises(GraphError):
        Bipartition.from_left_set(3, [0, 1]).check(g)


def test_save_load_round_trip(tmp_path):
    for sg in (
        generate("erdos_renyi", seed=9, n=12, density=0.3, p_range=(0.05, 1.0)),
        generate("random_bipartite", seed=9, n_left=3, n_right=4, density=0.8, p=0.25),
        make_sg(4, []),
    ):
        path = tmp_path / "g.graph"
        save(sg, path)
        assert load(path) == sg


def test_loader_comments_and_blank_lines():
    sg = loads("# header follows\n3 2\n\n0 1 0.5  # first\n1 2 1\n")
    assert sg.graph.edges == ((0, 1), (1, 2))
    assert list(sg.prob) == [0.5, 1.0]


@pytest.mark.parametrize(
    "text, msg, line",
    [
        ("4 1\n3 3 0.5\n", "self-loop", 2),
        ("2 1\n0 1 0\n", "probability out of range", 2),
        ("2 1\n0 1 1.5\n", "probability out of range", 2),
        ("3 2\n0 1 0.5\n0 1 0.4\n", "duplicate edge", 3),
        ("3 1\n1 0 0.5\n", "0 <= u < v < n", 2),
        ("3 2\n0 1 0.5\n", "declares 2 edges", None),
        ("3 1\n0 1\n", "u v p", 2),
        ("x y\n", "header", 1),
        ("3 1\n0 1 0.5\nbipartition 0 1\n", "bipartition", None),
    ],
)
def test_loader_errors(text, msg, line):
    with pytest.raises(GraphFormatError, match=msg) as exc:
        loads(text)
    if line is not None:
        assert exc.value.line == line
        assert f"line {line}" in str(exc.value)


def test_dumps_bipartition_trailer():
    sg = generate("path", seed=0, n=4, p=0.5)
    assert dumps(sg).strip().splitlines()[-1] == "bipartition 0 2"


def test_derived_streams_are_distinct_and_stable():
    a = derive_seed(1, "real", 0)
    assert a == derive_seed(1, "real", 0)
    assert len({a, derive_seed(1, "real", 1), derive_seed(1, "proto", 0), derive_seed(2, "real", 0)}) == 4
    assert stream(1, "x", 3).random() == generator(derive_seed(1, "x", 3)).random()

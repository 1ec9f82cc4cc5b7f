import numpy as np
import pytest

from stochdist import kernels
from stochdist.graph import generate, sample_realizations
from stochdist.oracles import brute_max_matching_size, brute_min_dominating_set_size, brute_min_vertex_cover_size
from stochdist.rng import derive_seed

from conftest import cycle, make_sg


def _suite(count=25, n_hi=11):
    rng = np.random.default_rng(3)
    for i in range(count):
        n = int(rng.integers(1, n_hi + 1))
        sg = generate("erdos_renyi", seed=derive_seed(4, "kern", i), n=n, density=float(rng.uniform(0.1, 0.9)), p=0.6)
        masks = sample_realizations(sg, [derive_seed(4, "kreal", 10 * i + t) for t in range(6)])
        yield sg, masks


def test_backend_switching():
    names = kernels.available_backends()
    assert "python" in names
    prev = kernels.set_backend("python")
    try:
        assert kernels.backend() == "python"
    finally:
        kernels.set_backend(prev)
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_kernels_against_brute_force(each_backend):
    for sg, masks in _suite():
        g = sg.graph
        mm = kernels.matching_batch(g.n, g.eu, g.ev, masks)
        vc = kernels.mvc_size_batch(g.n, g.eu, g.ev, masks)
        ds = kernels.mds_size_batch(g.n, g.eu, g.ev, masks)
        fr = kernels.frac_vc2_batch(g.n, g.eu, g.ev, masks)
        for t, row in enumerate(masks):
            assert mm[t].sum() == brute_max_matching_size(g, row)
            assert vc[t] == brute_min_vertex_cover_size(g, row)
            assert ds[t] == brute_min_dominating_set_size(g, row)
            assert mm[t].sum() <= fr[t].sum() / 2 <= vc[t]


def test_backends_agree_exactly():
    if len(kernels.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    prev = kernels.backend()
    try:
        for sg, masks in _suite(count=15, n_hi=16):
            g = sg.graph
            thr = np.arange(g.n, dtype=np.int64) % 5 + 3
            res = {}
            for be in kernels.available_backends():
                kernels.set_backend(be)
                res[be] = (
                    kernels.matching_batch(g.n, g.eu, g.ev, masks),
                    kernels.frac_vc2_batch(g.n, g.eu, g.ev, masks),
                    kernels.mvc_size_batch(g.n, g.eu, g.ev, masks),
                    kernels.mds_size_batch(g.n, g.eu, g.ev, masks),
                    kernels.dwf_events(g.n, g.eu, g.ev, masks[0], thr),
                )
            a, b = res["cython"], res["python"]
            for x, y in zip(a[:4], b[:4]):
                assert np.array_equal(x, y)
            for x, y in zip(a[4], b[4]):
                assert np.array_equal(np.asarray(x), np.asarray(y))
    finally:
        kernels.set_backend(prev)


def test_bitmask_kernels_fall_back_above_64_vertices(each_backend):
    # 70 isolated vertices plus one edge: the bitmask kernels must still work
    sg = make_sg(70, [(3, 68)], p=1.0)
    g = sg.graph
    mask = np.ones(1, dtype=np.uint8)
    assert kernels.mvc_exact(g.n, g.eu, g.ev, mask).sum() == 1
    assert kernels.mds_exact(g.n, g.eu, g.ev, mask).sum() == 69


def test_matching_on_odd_cycles_needs_blossoms(each_backend):
    # two triangles joined by an edge: size 3 needs a blossom contraction
    sg = make_sg(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)], p=1.0)
    g = sg.graph
    mates = kernels.matching_mates(g.n, g.eu, g.ev, np.ones(g.m, dtype=np.uint8))
    assert (mates >= 0).sum() == 6
    c = make_sg(9, cycle(9), p=1.0).graph
    assert (kernels.matching_mates(c.n, c.eu, c.ev, np.ones(c.m, np.uint8)) >= 0).sum() == 8


def test_dwf_events_single_edge(each_backend):
    sg = make_sg(2, [(0, 1)], p=1.0)
    g = sg.graph
    ecount, vcount, total, seg_len, seg_act = kernels.dwf_events(g.n, g.eu, g.ev, np.ones(1, np.uint8), np.array([4, 7]))
    # the lower threshold stops the edge after 4 joint increments
    assert list(np.asarray(ecount)) == [4]
    assert list(np.asarray(vcount)) == [4, 4]


def test_environment_forces_pure_python_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, STOCHDIST_PURE_PYTHON="1")
    code = "from stochdist import kernels; print(kernels.backend(), kernels.available_backends())"
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "python ['python']"

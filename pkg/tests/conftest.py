import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stochdist import kernels
from stochdist.graph import BaseGraph, StochasticGraph

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_sg(n, edges, p=0.5, bipartition=None):
    """Small helper: ``p`` is a scalar or a per-edge list."""
    probs = np.broadcast_to(np.asarray(p, dtype=np.float64), (len(edges),)).copy()
    return StochasticGraph(BaseGraph(n, tuple(edges)), probs, bipartition)


def cycle(n):
    return [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]


@pytest.fixture(params=kernels.available_backends())
def each_backend(request):
    prev = kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(prev)

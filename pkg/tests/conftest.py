import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from streamcut.graph import WeightedGraph

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def complete(n, w=1.0):
    return WeightedGraph.from_edges(n, [(a, b, w) for a, b in itertools.combinations(range(n), 2)],
                                    simple=w == 1.0)


def path(n):
    return WeightedGraph.from_edges(n, [(i, i + 1, 1.0) for i in range(n - 1)], simple=True)


def ring(n):
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)], simple=True)


@st.composite
def connected_graphs(draw, min_n=3, max_n=10, max_w=5):
    """Random spanning tree plus extra random edges, integer weights."""
    n = draw(st.integers(min_n, max_n))
    edges = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.append((u, v, float(draw(st.integers(1, max_w)))))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1),
                                    st.integers(1, max_w)), max_size=2 * n))
    edges += [(a, b, float(w)) for a, b, w in extra if a != b]
    return WeightedGraph.from_edges(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

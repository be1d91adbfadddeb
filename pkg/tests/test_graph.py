import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import complete, connected_graphs, path, ring
from streamcut.generators import gnp
from streamcut.graph import (Cut, GraphError, WeightedGraph, bitset_to_mask, cut_value, format_graph,
                             mask_to_bitset, min_degree_cut, parse_graph, quadratic_form, weight_cap)
from streamcut.oracles import to_networkx


def test_cut_value_small_cases():
    assert cut_value(complete(4), Cut.from_vertices(4, [0])) == 3
    for start in range(5):
        arc = [(start + i) % 5 for i in range(2)]
        assert cut_value(ring(5), Cut.from_vertices(5, arc)) == 2


def test_cut_value_frozen_instance():
    # independent pure-python edge scan gave 17
    g = gnp(12, 0.5, 12)
    assert cut_value(g, Cut.from_vertices(12, [0, 2, 3, 7, 9])) == 17


def test_cut_rejects_trivial_sides():
    with pytest.raises(GraphError):
        Cut(4, 0)
    with pytest.raises(GraphError):
        Cut(4, 0b1111)
    with pytest.raises(GraphError):
        cut_value(complete(4), np.ones(4, bool))


def test_quadratic_form_kernel_and_indicator():
    g = gnp(15, 0.4, 1)
    assert quadratic_form(g, np.ones(15)) == 0
    x = np.zeros(4)
    x[0] = 1
    assert quadratic_form(complete(4), x) == 3


@given(connected_graphs(), st.integers(0, 2**31))
def test_quadratic_form_matches_dense_laplacian(g, seed):
    x = np.random.default_rng(seed).normal(size=g.n)
    lap = np.zeros((g.n, g.n))
    for a, b, w in g.edges():
        lap[a, a] += w
        lap[b, b] += w
        lap[a, b] -= w
        lap[b, a] -= w
    assert quadratic_form(g, x) == pytest.approx(x @ lap @ x, rel=1e-9, abs=1e-9)


def test_min_degree_cut_examples():
    star = WeightedGraph.from_edges(6, [(0, i) for i in range(1, 6)])
    c = min_degree_cut(star)
    assert c.value == 1 and c.vertices() == [1]
    c = min_degree_cut(complete(4))
    assert c.value == 3 and c.vertices() == [0]


def test_min_degree_cut_frozen():
    rng = np.random.default_rng(3)
    n = 10
    edges = [(a, b, float(rng.integers(1, 6))) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.5]
    c = min_degree_cut(WeightedGraph.from_edges(n, edges))
    assert (c.value, c.vertices()) == (10.0, [1])


@given(st.integers(1, 70), st.data())
def test_bitset_mask_roundtrip(n, data):
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    assert np.array_equal(bitset_to_mask(mask_to_bitset(mask), n), mask)


@given(connected_graphs())
def test_canonical_cut_keeps_value(g):
    c = Cut.from_vertices(g.n, [g.n - 1])
    assert c.canonical().side & 1
    assert cut_value(g, c) == cut_value(g, c.canonical())


def test_simple_flag_validation():
    with pytest.raises(GraphError):
        WeightedGraph.from_edges(3, [(0, 1), (1, 0)], simple=True)
    with pytest.raises(GraphError):
        WeightedGraph.from_edges(3, [(0, 1, 2.0)], simple=True)


def test_weight_cap_and_bad_edges():
    assert weight_cap(10) == 10**6
    with pytest.raises(GraphError):
        WeightedGraph.from_edges(3, [(0, 5)])
    with pytest.raises(GraphError):
        WeightedGraph.from_edges(3, [(0, 1, -1.0)])


def test_text_roundtrip():
    g = gnp(20, 0.3, 2).with_weights(np.arange(1, gnp(20, 0.3, 2).m + 1) / 3)
    h = parse_graph(format_graph(g))
    assert h.n == g.n and np.array_equal(h.u, g.u) and np.allclose(h.w, g.w, rtol=0, atol=0)
    with pytest.raises(GraphError):
        parse_graph("3 2\n0 1\n")


def test_components_and_degrees():
    g = WeightedGraph.from_edges(5, [(0, 1, 2.0), (3, 4, 1.0)])
    lab = g.components()
    assert lab[0] == lab[1] != lab[2] and lab[3] == lab[4]
    assert not g.is_connected() and path(4).is_connected()
    assert list(g.degrees()) == [2, 2, 0, 1, 1]
    assert to_networkx(g).number_of_edges() == 2

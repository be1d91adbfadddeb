import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import complete, connected_graphs, path, ring
from streamcut.generators import gnp
from streamcut.graph import WeightedGraph, cut_value
from streamcut.linalg import (JLIncidenceSketch, LaplacianSolver, effective_resistance_exactish, jl_rows,
                              median_of, rademacher_block, resistance_embedding, pair_resistances,
                              solve_laplacian)
from streamcut.oracles import dense_er_matrix, laplacian_pinv


def test_single_edge_columns():
    sk = JLIncidenceSketch(4, 16, seed=1)
    sk.absorb_edge(0, 1, 1.0, edge_id=7)
    t = sk.edge_vector(7)
    assert np.array_equal(sk.cols[:, 0], t) and np.array_equal(sk.cols[:, 1], -t)
    assert not sk.cols[:, 2:].any()
    sk.absorb_edge(0, 1, 1.0, edge_id=7)
    assert np.allclose(sk.cols[:, 0], 2 * t)


def test_rademacher_is_pure_function():
    a = rademacher_block(5, np.array([3, 9, 3]), 70)
    b = rademacher_block(5, np.array([3]), 70)
    assert np.array_equal(a[:, 0], a[:, 2]) and np.array_equal(a[:, 0], b[:, 0])
    assert set(np.unique(np.abs(a) * np.sqrt(70)).round(9)) == {1.0}


def test_merge_single_edge_gives_zero():
    sk = JLIncidenceSketch(3, 8, 2)
    sk.absorb_edge(0, 1)
    sk.merge_columns(0, 1)
    assert np.allclose(sk.cols[:, 0], 0)
    with pytest.raises(ValueError):
        sk.merge_columns(0, 1)


def test_triangle_contracted_columns_are_negatives():
    sk = JLIncidenceSketch(3, 32, 4)
    sk.absorb_graph(complete(3))
    sk.merge_columns(0, 1)
    live = sk.live_columns()
    assert np.allclose(sk.cols[:, live[0]], -sk.cols[:, live[1]])


def test_k4_singleton_estimate_monte_carlo():
    # k = 64 ln 4 / eps^2 at eps = 0.5; the exact cut value is 3
    eps = 0.5
    k = int(np.ceil(64 * np.log(4) / eps**2))
    hits = 0
    for seed in range(1000):
        sk = JLIncidenceSketch(4, k, seed)
        sk.absorb_graph(complete(4))
        mask = np.array([1, 0, 0, 0], bool)
        hits += abs(sk.estimate(mask) / 3 - 1) <= eps
    assert hits / 1000 >= 2 / 3


@given(connected_graphs(min_n=4, max_n=9), st.integers(0, 10_000))
def test_contraction_estimate_is_linear(g, seed):
    # merged column equals the sketch of the side's indicator
    sk = JLIncidenceSketch(g.n, 40, seed)
    sk.absorb_graph(g)
    side = [0, 1]
    expected = sk.estimate(np.isin(np.arange(g.n), side))
    sk.merge_columns(0, 1)
    c = sk.cols[:, 0]
    assert float(c @ c) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_random_contraction_estimate_accuracy():
    g = gnp(20, 0.4, 3)
    eps = 0.5
    hits = 0
    for seed in range(60):
        sk = JLIncidenceSketch(g.n, jl_rows(g.n, eps, c_jl=16), seed)
        sk.absorb_graph(g)
        order = np.random.default_rng(seed).permutation(g.n)
        a, b = order[0], order[1]
        for x in order[2:]:
            sk.merge_columns(a if x % 2 else b, x)
        mask = np.zeros(g.n, bool)
        mask[[a] + [x for x in order[2:] if x % 2]] = True
        hits += abs(sk.cut_estimate() / cut_value(g, mask) - 1) <= eps
    assert hits / 60 >= 2 / 3


def test_solver_trivial_cases():
    s = LaplacianSolver(path(2))
    assert np.allclose(solve_laplacian(s, np.zeros(2)), 0)
    x = solve_laplacian(s, np.array([1.0, -1.0]))
    assert np.allclose(x, [0.5, -0.5], atol=1e-8)
    assert effective_resistance_exactish(s, 0, 1) == pytest.approx(1.0, abs=1e-8)


def test_solver_matches_pinv():
    g = gnp(40, 0.2, 9)
    b = np.random.default_rng(0).normal(size=g.n)
    b -= b.mean()
    x = LaplacianSolver(g, tol=1e-12).solve(b)
    assert np.allclose(x - x.mean(), laplacian_pinv(g) @ b, atol=1e-6)


def test_resistance_cycle_and_frozen():
    s = LaplacianSolver(ring(4), tol=1e-12)
    assert effective_resistance_exactish(s, 0, 1) == pytest.approx(0.75, abs=1e-8)
    g = gnp(30, 0.3, 30)
    s = LaplacianSolver(g, tol=1e-12)
    # frozen from the dense pseudoinverse oracle
    assert effective_resistance_exactish(s, 0, 1) == pytest.approx(0.38261033848123294, abs=1e-5)
    assert effective_resistance_exactish(s, 5, 17) == pytest.approx(0.2308859411091944, abs=1e-5)
    assert dense_er_matrix(g)[0, 1] == pytest.approx(0.38261033848123294, abs=1e-12)


def test_resistance_embedding_across_components():
    g = WeightedGraph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    z, labels = resistance_embedding(g, 200, 1, tol=1e-12)
    r = pair_resistances(z, labels, np.array([0, 0]), np.array([2, 3]))
    assert r[0] == pytest.approx(2.0, rel=0.3)
    assert np.isinf(r[1]) or r[1] > 1e6


def test_median_of_needs_odd():
    assert median_of([1, 5, 3]) == 3
    with pytest.raises(ValueError):
        median_of([1, 2])

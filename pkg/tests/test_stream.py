import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import complete, connected_graphs
from streamcut.generators import dumbbell, gnp
from streamcut.graph import WeightedGraph, weight_cap
from streamcut.oracles import all_cut_values, stoer_wagner_min_cut
from streamcut.sparsify import Kind, SketchConfig
from streamcut.stream import (BlockTower, EdgeStream, OnlineSampler, SpaceMeter, StreamConfig, StreamError,
                              StreamingSparsifier, default_m_space, stream_forall_sparsifier,
                              stream_foreach_sparsifier)


def _tree(n, seed):
    rng = np.random.default_rng(seed)
    return WeightedGraph.from_edges(n, [(int(rng.integers(v)), v, 1.0) for v in range(1, n)])


def test_stream_is_single_pass():
    s = EdgeStream.from_graph(gnp(20, 0.3, 1), shuffle=4)
    ids = [e[0] for e in s]
    assert sorted(ids) == list(range(len(s))) and ids != sorted(ids)
    assert np.all(s.visits == 1)
    with pytest.raises(StreamError):
        list(s)


def test_shuffle_is_seeded():
    g = gnp(20, 0.3, 1)
    a = [e[0] for e in EdgeStream.from_graph(g, shuffle=9)]
    b = [e[0] for e in EdgeStream.from_graph(g, shuffle=9)]
    assert a == b


def test_first_edge_and_bridge_are_kept():
    smp = OnlineSampler(10, 0.5, 0, lambda: WeightedGraph.from_edges(10, []), c0=1.0)
    kept, w, p = smp.sample(0, 1, 1.0)
    assert kept and p == 1.0 and w == 1.0
    assert smp.lam == 1 / weight_cap(10)


def test_disconnected_endpoints_force_keep():
    g = gnp(30, 0.5, 2)
    sub = WeightedGraph(30, g.u[g.u < 15], g.v[g.u < 15], g.w[g.u < 15])
    sub = WeightedGraph(30, sub.u[sub.v < 15], sub.v[sub.v < 15], sub.w[sub.v < 15])
    smp = OnlineSampler(30, 0.5, 0, lambda: sub, c0=0.001, refresh_min=0)
    smp.kept = 1  # force a refresh on the next call
    kept, _, p = smp.sample(3, 20, 1.0)
    assert kept and p == 1.0


def test_k50_kept_count_and_small_exhaustive():
    g = complete(50)
    h = stream_foreach_sparsifier(EdgeStream.from_graph(g, shuffle=3), 0.5, 3)
    bound = 1.0 * 50 * math.log(50) ** 2 / 0.25 * 2
    assert h.meta["sampled"] <= bound
    small = complete(14)
    sides, truth = all_cut_values(small)
    h = stream_foreach_sparsifier(EdgeStream.from_graph(small, shuffle=3), 0.5, 3)
    _, est = all_cut_values(h.graph)
    assert np.all(np.abs(est / truth - 1) <= 0.5)


def _recording_reducer(calls):
    def red(g, eps, seed, src):
        from streamcut.sparsify import Sparsifier
        calls.append(g.m)
        return Sparsifier(g, Kind.FOR_EACH, eps, seed, src, {})
    return red


def test_tower_without_cascade():
    calls = []
    t = BlockTower(10, 0.5, 0, _recording_reducer(calls), m_space=100)
    for i in range(60):
        t.push(i % 9, 9, 1.0, i)
    h = t.finish(Kind.FOR_EACH)
    assert t.trace == [] and calls == [60] and h.meta["tower_factor"] == 1.0


def test_tower_two_blocks_one_cascade():
    calls = []
    t = BlockTower(10, 0.5, 0, _recording_reducer(calls), m_space=20)
    for i in range(40):
        t.push(i % 9, 9, 1.0, i)
    assert len(t.trace) == 1 and t.trace[0]["level"] == 1 and t.trace[0]["inputs"] == 20
    h = t.finish(Kind.FOR_EACH)
    assert calls == [20, 40] and sorted(h.source_edge_ids) == list(range(40))


@given(st.integers(5, 400), st.floats(0.05, 0.9))
def test_tower_factor_telescopes(n, eps):
    t = BlockTower(n, eps, 0, _recording_reducer([]), m_space=1)
    assert (1 + t.eps_blk) ** t.levels == pytest.approx(1 + eps, rel=1e-12)


def test_cascading_tower_factor_bound():
    # 4 levels of 20 edges hold 2^4 * 20 edges before the top block overflows
    t = BlockTower(8, 0.5, 0, _recording_reducer([]), m_space=20)
    for i in range(300):
        t.push(i % 7, 7, 1.0, i)
    h = t.finish(Kind.FOR_EACH)
    assert h.meta["cascades"] > 5 and h.meta["overflows"] == 0
    assert h.meta["tower_factor"] <= 1.5 + 1e-12
    assert t.max_depth() <= t.levels


def test_tower_overflow_is_reported():
    t = BlockTower(8, 0.5, 0, _recording_reducer([]), m_space=3)
    for i in range(200):
        t.push(i % 7, 7, 1.0, i)
    h = t.finish(Kind.FOR_EACH)
    assert h.meta["overflows"] > 0 and h.meta["tower_factor"] > 1.5


def test_tree_streams_exactly():
    g = _tree(40, 2)
    for fn in (stream_foreach_sparsifier, stream_forall_sparsifier):
        h = fn(EdgeStream.from_graph(g, shuffle=1), 0.3, 1)
        assert sorted(h.source_edge_ids) == list(range(g.m)) and np.allclose(h.graph.w, 1)


def test_k16_exhaustive_cuts():
    g = complete(16)
    sides, truth = all_cut_values(g)
    good = 0
    for seed in range(20):
        h = stream_foreach_sparsifier(EdgeStream.from_graph(g, shuffle=seed), 0.3, seed,
                                      StreamConfig(c_online=0.3, space_exponent=1.0))
        _, est = all_cut_values(h.graph)
        good += np.all(np.abs(est / truth - 1) <= 0.3)
    assert good / 20 >= 0.95


def test_dumbbell_min_cut_preserved():
    h = stream_foreach_sparsifier(EdgeStream.from_graph(dumbbell(15), shuffle=2), 0.3, 2,
                                  StreamConfig(c_online=0.05, space_exponent=1.0))
    assert stoer_wagner_min_cut(h.graph)[0] == pytest.approx(1.0)


@given(connected_graphs(min_n=4, max_n=12), st.integers(0, 100))
def test_output_is_reweighted_subgraph(g, seed):
    h = stream_foreach_sparsifier(EdgeStream.from_graph(g, shuffle=seed), 0.5, seed,
                                  StreamConfig(c_online=0.05, m_space=5))
    src = h.source_edge_ids
    assert len(set(src.tolist())) == len(src)
    assert np.array_equal(g.u[src], h.graph.u) and np.array_equal(g.v[src], h.graph.v)
    assert np.all(h.graph.w > 0)


def test_space_meter_and_csv(tmp_path):
    meter = SpaceMeter()
    stream_foreach_sparsifier(EdgeStream.from_graph(gnp(40, 0.3, 1)), 0.5, 1,
                              StreamConfig(m_space=50), meter)
    assert meter.peak >= meter.live > 0
    path = tmp_path / "space.csv"
    meter.write_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["step", "live_words", "peak_words", "component"]
    peaks = [int(r[2]) for r in rows[1:]]
    assert peaks == sorted(peaks) and peaks[-1] == meter.peak


def test_default_m_space():
    assert default_m_space(100, 0.5, 3) == math.ceil(100 * math.log(100) ** 3 / 0.5)


def test_engine_meta():
    eng = StreamingSparsifier(30, 0.5, 0, Kind.FOR_ALL, StreamConfig(m_space=40))
    g = gnp(30, 0.4, 3)
    for i, (a, b, w) in enumerate(g.edges()):
        eng.push(i, a, b, w)
    h = eng.finish()
    assert h.meta["arrivals"] == g.m and h.kind is Kind.FOR_ALL and h.meta["cascades"] >= 1

import json

import numpy as np
import pytest

from streamcut.generators import dumbbell, gnp, planted_bisection
from streamcut.graph import WeightedGraph, cut_value
from streamcut.mincut import MinCutConfig, approx_min_cut_stream
from streamcut.oracles import stoer_wagner_min_cut
from streamcut.stream import EdgeStream, SpaceMeter


def test_disconnected_stream():
    g = WeightedGraph.from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    res = approx_min_cut_stream(EdgeStream.from_graph(g), 0.2, 0)
    assert res.value == 0 and res.cut.vertices() == [0, 1, 2] and res.crossing_edges == []


@pytest.mark.parametrize("seed", range(3))
def test_dumbbell_bridge(seed):
    g = dumbbell(12)
    res = approx_min_cut_stream(EdgeStream.from_graph(g, shuffle=seed), 0.2, seed)
    assert res.value == pytest.approx(1.0, rel=0.2)
    assert res.cut.key() == (1 << 12) - 1
    assert res.crossing_edges == [g.m - 1]


def test_random_instances_within_eps():
    for seed, g in enumerate([gnp(80, 0.12, 5), planted_bisection(60, 0.5, 6, seed=2)]):
        opt, _ = stoer_wagner_min_cut(g)
        meter = SpaceMeter()
        res = approx_min_cut_stream(EdgeStream.from_graph(g, shuffle=seed), 0.2, seed, meter=meter)
        assert abs(res.value - opt) <= 0.2 * opt
        assert cut_value(g, res.cut) <= 1.2 * opt
        assert res.meta["space_words_peak"] == meter.peak > 0
        assert res.meta["family_size"] <= res.meta["family_size_bound"]


def test_crossing_edges_are_stream_ids():
    g = planted_bisection(40, 0.6, 3, seed=1)
    res = approx_min_cut_stream(EdgeStream.from_graph(g, shuffle=1), 0.2, 1)
    mask = res.cut.mask()
    assert all(mask[g.u[e]] != mask[g.v[e]] for e in res.crossing_edges)


def test_json_shape():
    g = dumbbell(6)
    res = approx_min_cut_stream(EdgeStream.from_graph(g), 0.3, 0, MinCutConfig(coarse=True))
    out = res.to_json(g.edges())
    assert set(out) == {"value", "side", "crossing_edges", "space_words_peak", "family_size"}
    assert out["crossing_edges"] == [[5, 6]]
    json.dumps(out)

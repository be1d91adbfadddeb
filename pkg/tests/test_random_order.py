import numpy as np
import pytest
from scipy.stats import hypergeom

from conftest import ring
from streamcut.generators import gnp
from streamcut.graph import Cut, GraphError, WeightedGraph
from streamcut.oracles import brute_force_cut_family
from streamcut.random_order import (RandomOrderConfig, check_simple_stream,
                                    exact_min_cut_random_order, prefix_concentration_probe)
from streamcut.stream import EdgeStream


def _check_exact(g, res):
    fam = brute_force_cut_family(g, 1.0)
    opt = min(fam.values())
    assert res.value == opt
    assert {c.key() for c in res.cuts} == set(fam)
    for c in res.cuts:
        mask = c.mask()
        want = sorted(e for e in range(g.m) if mask[g.u[e]] != mask[g.v[e]])
        assert res.crossing[c.key()] == want


def test_cycle_all_min_cuts():
    g = ring(8)
    res = exact_min_cut_random_order(EdgeStream.from_graph(g, shuffle=4), 4)
    assert res.value == 2 and len(res.cuts) == 28
    _check_exact(g, res)


def test_disconnected_is_zero():
    g = WeightedGraph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    res = exact_min_cut_random_order(EdgeStream.from_graph(g, shuffle=0), 0)
    assert res.value == 0 and res.cuts


@pytest.mark.parametrize("edges", [[(0, 1), (1, 0)], [(0, 1, 2.0)]])
def test_rejects_non_simple(edges):
    with pytest.raises(GraphError):
        check_simple_stream(EdgeStream.from_graph(WeightedGraph.from_edges(2, edges)))


@pytest.mark.parametrize("seed", [1, 2])
def test_low_threshold_exercises_phase_two(seed):
    g = gnp(14, 0.7, seed)
    res = exact_min_cut_random_order(EdgeStream.from_graph(g, shuffle=seed), seed,
                                     RandomOrderConfig(c_thresh=0.5))
    assert res.meta["froze_at"] is not None
    fam = brute_force_cut_family(g, 1.0)
    assert res.value == min(fam.values())
    assert {c.key() for c in res.cuts} == set(fam)


def test_json_shape():
    g = ring(5)
    out = exact_min_cut_random_order(EdgeStream.from_graph(g, shuffle=1), 1).to_json(g.edges())
    assert out["value"] == 2 and len(out["cuts"]) == 10
    assert all(len(c["crossing_edges"]) == 2 for c in out["cuts"])


def test_probe_full_prefix_has_no_deviation():
    g = gnp(20, 1.0, 0)
    rows = prefix_concentration_probe(g, ells=(19,), trials=20)
    assert rows[0]["prefix_edges"] == [g.m] * g.n
    assert rows[0]["mean_deviation"] == 0 and rows[0]["failure_rate"] == 0


def test_probe_matches_hypergeometric():
    # a cut with 2 crossing edges among 40; ell=1 gives a 20-edge prefix, and
    # any count other than 1 deviates by more than 10%
    g = WeightedGraph.from_edges(41, [(0, 1), (0, 2)] + [(i, i + 1) for i in range(2, 40)])
    cut = Cut(g.n, 1 << 0, 2.0)
    want = 1 - hypergeom(g.m, 2, 20).pmf(1)
    assert want == pytest.approx(0.4871794871794872)
    rate = prefix_concentration_probe(g, ells=(1,), trials=4000, seed=3, cuts=[cut])[0]["failure_rate"]
    assert abs(rate - want) < 4 * np.sqrt(want * (1 - want) / 4000)

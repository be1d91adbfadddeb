import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from streamcut.generators import (CorpusEntry, admissible_eps, approx_bits_length, cycle, dumbbell,
                                  gen_corpus, gen_hard_approx, gen_hard_exact, generate, gnp,
                                  graph_digest, kedge_layered, pair_of_index, planted_bisection,
                                  random_gadget_draw, regular)
from streamcut.graph import GraphError
from streamcut.graph import read_graph
from streamcut.oracles import stoer_wagner_min_cut


def test_deterministic_digest():
    assert graph_digest(gnp(20, 0.5, 7)) == "df2880e58d71e1fe"
    assert graph_digest(gnp(20, 0.5, 7)) == graph_digest(generate("gnp", {"n": 20, "p": 0.5}, 7))
    assert graph_digest(gnp(20, 0.5, 8)) != "df2880e58d71e1fe"


def test_family_min_cuts():
    assert stoer_wagner_min_cut(dumbbell(10))[0] == 1
    assert stoer_wagner_min_cut(cycle(9))[0] == 2
    assert stoer_wagner_min_cut(kedge_layered(4, 10, 3, 0.9, 1))[0] <= 3
    g = regular(30, 4, 2)
    assert set(g.degrees()) == {4}


def test_planted_bisection_is_the_min_cut():
    g = planted_bisection(60, 0.5, 5, seed=3)
    val, cut = stoer_wagner_min_cut(g)
    assert val == 5 and sorted(cut.vertices()) in (list(range(30)), list(range(30, 60)))


def test_unknown_kind():
    with pytest.raises(GraphError):
        generate("nope", {}, 0)


@given(st.integers(2, 12), st.data())
def test_pair_of_index_enumerates_upper_triangle(n, data):
    i = data.draw(st.integers(0, n * (n - 1) // 2 - 1))
    iu, ju = np.triu_indices(n, 1)
    assert pair_of_index(n, i) == (iu[i], ju[i])


def test_exact_gadget_complete_graph():
    inst = gen_hard_exact(4, [1] * 6, 0)
    assert inst.truth["min_cut"] == 4 and inst.graph.n == 29
    assert stoer_wagner_min_cut(inst.graph)[0] == 4


def test_exact_gadget_bit_zero():
    bits = [0, 1, 1, 1, 1, 1]  # pair (0, 1) absent, both endpoints of degree 2
    inst = gen_hard_exact(4, bits, 0)
    t = inst.truth
    assert (t["bit"], t["deg_a"], t["deg_b"], t["min_cut"]) == (0, 2, 2, 3)
    assert stoer_wagner_min_cut(inst.graph)[0] == 3
    assert inst.split == 5


def test_exact_gadget_degenerate():
    with pytest.raises(GraphError):
        gen_hard_exact(3, [0, 0, 0], 0)


def test_admissible_eps():
    assert admissible_eps(0.125) == Fraction(1, 8)
    assert admissible_eps(0.1) == Fraction(1, 12)
    assert admissible_eps(1 / 12) == Fraction(1, 12)
    with pytest.raises(GraphError):
        admissible_eps(0.2)
    assert approx_bits_length(Fraction(1, 12), 2) == 6


@pytest.mark.parametrize("seed", range(5))
def test_approx_gadget_min_cut(seed):
    rng = np.random.default_rng(seed)
    bits, index, inst = random_gadget_draw(
        rng, 6, lambda b, i: gen_hard_approx(Fraction(1, 12), b, i))
    assert inst.graph.n == 25
    assert stoer_wagner_min_cut(inst.graph)[0] == inst.truth["min_cut"]


def test_gen_corpus(tmp_path):
    entries = [CorpusEntry("gnp", {"n": 12, "p": 0.4}, 1), CorpusEntry("cycle", {"n": 6}, 0)]
    out = gen_corpus(entries, tmp_path)
    manifest = json.loads(out.read_text())
    assert len(manifest) == 2
    for e, row in zip(entries, manifest):
        g = read_graph(tmp_path / row["file"])
        assert graph_digest(g) == row["sha256_16"] == graph_digest(e.build())

"""Acceptance suite: one function per criterion, each returning a CriterionResult.

`quick=True` shrinks every experiment so the suite can be smoke-tested in
seconds; verdicts are only meaningful at full size.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import generators as gen
from .contraction import base_size, default_reps, enumerate_approx_min_cuts
from .effres import build_er_sketch, query_pairs, upper_pairs
from .graph import Cut, WeightedGraph, cut_value
from .linalg import JLIncidenceSketch, jl_rows
from .mincut import approx_min_cut_stream
from .oracles import (brute_force_cut_family, cuts_below, dense_er_matrix, foster_sum,
                      stoer_wagner_min_cut)
from .random_order import RandomOrderConfig, exact_min_cut_random_order, prefix_concentration_probe
from .sparsify import sample_cycles, short_cycle_decompose
from .stream import EdgeStream, SpaceMeter, StreamConfig, stream_foreach_sparsifier


@dataclass
class CriterionResult:
    cid: str
    title: str
    passed: bool
    summary: str
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.cid}: {self.title} :: {self.summary}"


def _timed(fn):
    def run(quick: bool = False, **kw) -> CriterionResult:
        t = time.perf_counter()
        res = fn(quick=quick, **kw)
        res.seconds = time.perf_counter() - t
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def _qforms(g: WeightedGraph, X: np.ndarray) -> np.ndarray:
    d = X[:, g.u] - X[:, g.v]
    return (d * d) @ g.w


# ------------------------------------------------------------------ 1

@_timed
def criterion_1(quick=False, eps=0.2):
    """Approximate min cut over a mixed corpus against Stoer-Wagner."""
    entries = gen.mincut_corpus(8 if quick else 50)
    if quick:
        entries = [e for e in entries if e.params.get("n", 0) != 300][:8]
    rows = []
    for i, e in enumerate(entries):
        g = e.build()
        opt, _ = stoer_wagner_min_cut(g)
        t = time.perf_counter()
        res = approx_min_cut_stream(EdgeStream.from_graph(g), eps, seed=i)
        secs = time.perf_counter() - t
        true_val = cut_value(g, res.cut)
        rows.append({"name": e.name, "opt": opt, "value": res.value, "cut_true": true_val,
                     "value_ok": abs(res.value - opt) <= eps * opt + 1e-9,
                     "cut_ok": true_val <= (1 + eps) * opt + 1e-9, "seconds": secs,
                     "family": res.meta.get("family_size")})
    fv = np.mean([r["value_ok"] for r in rows])
    fc = np.mean([r["cut_ok"] for r in rows])
    worst = max(r["seconds"] for r in rows)
    ok = fv >= 0.95 and fc >= 0.95 and worst <= 600
    return CriterionResult("1", "approximate min cut end-to-end", bool(ok),
                           f"value within 1±{eps}: {fv:.1%}, cut <= {1 + eps}x opt: {fc:.1%}, "
                           f"instances {len(rows)}, slowest {worst:.0f}s",
                           {"rows": rows})


# ------------------------------------------------------------------ 2

STRESSED = StreamConfig(c_online=0.02, space_exponent=1.0)


@_timed
def criterion_2(quick=False, eps=0.5):
    """Single copy within 1±eps for >= 2/3 of (vector, seed) pairs; median-of-9 for >= 99% of vectors."""
    g = gen.gnp(200, 0.2, 11)
    nvec, nseeds = (200, 9) if quick else (1000, 30)
    X = (np.random.default_rng(2024).random((nvec, g.n)) < 0.5).astype(float)
    truth = _qforms(g, X)
    out = {}
    for label, cfg in (("default", StreamConfig()), ("stressed", STRESSED)):
        ests, kept = [], []
        for s in range(nseeds):
            h = stream_foreach_sparsifier(EdgeStream.from_graph(g, shuffle=s), eps, s, cfg)
            ests.append(_qforms(h.graph, X))
            kept.append(h.graph.m)
        ests = np.array(ests)
        within = np.abs(ests / truth - 1) <= eps
        med = np.median(ests[:9], axis=0)
        out[label] = {"single": float(within.mean()),
                      "median9": float(np.mean(np.abs(med / truth - 1) <= eps)),
                      "kept_mean": float(np.mean(kept)), "m": g.m}
    d = out["default"]
    ok = d["single"] >= 2 / 3 and d["median9"] >= 0.99
    s = out["stressed"]
    return CriterionResult("2", "for-each query contract", bool(ok),
                           f"single {d['single']:.1%}, median-of-9 {d['median9']:.1%} "
                           f"(kept {d['kept_mean']:.0f}/{d['m']}); stressed constants: single "
                           f"{s['single']:.1%}, median {s['median9']:.1%}, kept {s['kept_mean']:.0f}",
                           out)


# ------------------------------------------------------------------ 3

@_timed
def criterion_3(quick=False):
    """Peak space slope vs n in [0.9, 1.35]; halving eps grows the peak by <= 2.8x."""
    ns = [50, 100, 200] if quick else [100, 200, 400, 800]
    out = {}
    for label, cfg in (("default", StreamConfig()), ("stressed", STRESSED)):
        peaks = {}
        for eps in (0.5, 0.25):
            for n in ns:
                g = gen.gnp(n, min(1.0, 40 / (n - 1)), n)
                meter = SpaceMeter()
                stream_foreach_sparsifier(EdgeStream.from_graph(g, shuffle=1), eps, 1, cfg, meter)
                peaks[(n, eps)] = meter.peak
        p5 = np.array([peaks[(n, 0.5)] for n in ns], dtype=float)
        slope = float(np.polyfit(np.log(ns), np.log(p5), 1)[0])
        ratio = max(peaks[(n, 0.25)] / peaks[(n, 0.5)] for n in ns)
        out[label] = {"slope": slope, "eps_ratio": ratio,
                      "peaks": {f"{n}@{e}": v for (n, e), v in peaks.items()}}
    d = out["default"]
    ok = 0.9 <= d["slope"] <= 1.35 and d["eps_ratio"] <= 2.8
    s = out["stressed"]
    return CriterionResult("3", "space scaling", bool(ok),
                           f"slope {d['slope']:.3f}, eps-halving ratio {d['eps_ratio']:.2f}; "
                           f"stressed constants: slope {s['slope']:.3f}, ratio {s['eps_ratio']:.2f}", out)


# ------------------------------------------------------------------ 4

def _small_random_order_graphs():
    return [("cycle12", gen.cycle(12)), ("gnp16", gen.gnp(16, 0.4, 3)),
            ("layered", gen.kedge_layered(2, 8, 2, 0.9, 1)), ("dumbbell8", gen.dumbbell(8))]


def _true_crossing(g: WeightedGraph, mask: np.ndarray) -> list[int]:
    return np.flatnonzero(mask[g.u] != mask[g.v]).tolist()


@_timed
def criterion_4(quick=False, c_edge=8.0):
    """Random-order exact min cut: value rate, exact families on small graphs, |T| <= 8n."""
    shuffles = 4 if quick else 100
    per_graph = max(1, shuffles // 5)
    big = {}
    t_ok = True
    t_max = 0.0
    for label in ("planted", "sparse"):
        hits = 0
        for s in range(shuffles):
            gseed = s // per_graph
            g = gen.planted_bisection(256, 0.35, seed=gseed) if label == "planted" else gen.regular(200, 4, gseed)
            opt = stoer_wagner_min_cut(g)[0]
            res = exact_min_cut_random_order(EdgeStream.from_graph(g, shuffle=1000 + s), s)
            hits += res.value == opt
            t_max = max(t_max, res.meta["T_size"] / g.n)
            t_ok &= res.meta["T_size"] <= c_edge * g.n
        big[label] = hits / shuffles
    small_total = small_exact = 0
    for name, g in _small_random_order_graphs():
        fam = brute_force_cut_family(g, 1.0)
        opt = min(fam.values())
        for s in range(3 if quick else 10):
            res = exact_min_cut_random_order(EdgeStream.from_graph(g, shuffle=s), s)
            if res.value != opt:
                continue
            small_total += 1
            same = {c.key() for c in res.cuts} == set(fam)
            same &= all(res.crossing[c.key()] == _true_crossing(g, c.mask()) for c in res.cuts)
            small_exact += same
    # phase two only starts once the prefix min cut clears c_thresh * ln n; a low
    # threshold forces it on the planted instance so the suffix filter and |T| are exercised
    p2 = {"runs": 0, "correct": 0, "phase2": 0, "T_max_over_n": 0.0}
    for s in range(2 if quick else 4):
        g = gen.planted_bisection(256, 0.35, seed=s)
        opt = stoer_wagner_min_cut(g)[0]
        res = exact_min_cut_random_order(EdgeStream.from_graph(g, shuffle=s), s, RandomOrderConfig(c_thresh=2.0))
        p2["runs"] += 1
        p2["correct"] += res.value == opt
        p2["phase2"] += res.meta["phase"] == 2
        p2["T_max_over_n"] = max(p2["T_max_over_n"], res.meta["T_size"] / g.n)
        t_ok &= res.meta["T_size"] <= c_edge * g.n
    ok = big["planted"] >= 0.95 and big["sparse"] >= 0.95 and small_exact == small_total and t_ok
    return CriterionResult("4", "exact random-order min cut", bool(ok),
                           f"planted {big['planted']:.0%}, sparse {big['sparse']:.0%}, small-family exact "
                           f"{small_exact}/{small_total}, low-threshold runs {p2['correct']}/{p2['runs']} "
                           f"correct ({p2['phase2']} reached phase 2), max |T|/n "
                           f"{max(t_max, p2['T_max_over_n']):.2f}",
                           {"rates": big, "small": [small_exact, small_total], "phase2": p2})


# ------------------------------------------------------------------ 5

@_timed
def criterion_5(quick=False):
    """Prefix concentration on K20 singletons: rates strictly decreasing in ell, <= 0.05 at 40."""
    n = 20
    k20 = WeightedGraph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n)], simple=True)
    rows = prefix_concentration_probe(k20, (10, 20, 40), 1000 if quick else 10_000, seed=5)
    rates = [r["failure_rate"] for r in rows]
    ok = rates[0] > rates[1] > rates[2] and rates[2] <= 0.05
    capped = [r["ell"] for r in rows if r["capped"]]
    return CriterionResult("5", "prefix concentration", bool(ok),
                           "failure rates " + ", ".join(f"l={r['ell']}: {r['failure_rate']:.4f}" for r in rows)
                           + (f"; prefix capped at the full stream for l in {capped}" if capped else ""),
                           {"rows": rows})


# ------------------------------------------------------------------ 6

@_timed
def criterion_6(quick=False, eps=0.3):
    """All-pairs ER within 1±eps for >= 99% of pairs; Foster identity on the oracle."""
    g = gen.gnp(60 if quick else 100, 0.3, 6)
    truth = dense_er_matrix(g)
    foster = foster_sum(g, truth)
    h = stream_foreach_sparsifier(EdgeStream.from_graph(g, shuffle=6), eps, 6)
    sk = build_er_sketch(h, eps, 6)
    us, vs = upper_pairs(g.n)
    est = query_pairs(sk, us, vs)
    rel = np.abs(est - truth[us, vs]) / truth[us, vs]
    frac = float(np.mean(rel <= eps))
    ok = frac >= 0.99 and abs(foster - (g.n - 1)) <= 1e-6
    return CriterionResult("6", "all-pairs effective resistance", bool(ok),
                           f"{frac:.2%} of {len(us)} pairs within 1±{eps} (max rel err {rel.max():.3f}, "
                           f"k={sk.k}); Foster |sum - (n-1)| = {abs(foster - (g.n - 1)):.2e}",
                           {"fraction": frac, "max_rel": float(rel.max()), "foster": foster})


# ------------------------------------------------------------------ 7

@_timed
def criterion_7(quick=False):
    """Cycle decomposition structure and per-bucket degree preservation."""
    entries = gen.structure_corpus() + ([] if quick else gen.mincut_corpus(50))
    failures = []
    stats = {"graphs": 0, "cycles": 0, "max_len_ratio": 0.0}
    rng = np.random.default_rng(7)
    for e in entries:
        g = e.build()
        dec = short_cycle_decompose(g)
        stats["graphs"] += 1
        stats["cycles"] += len(dec.cycles)
        try:
            dec.check(g.m, g.n)
        except AssertionError as exc:
            failures.append(f"{e.name}: {exc}")
            continue
        if dec.cycles:
            stats["max_len_ratio"] = max(stats["max_len_ratio"],
                                         max(len(c) for c in dec.cycles) / dec.l_max)
        new_w = sample_cycles(g.w, dec.cycles, rng)
        before = np.bincount(g.u, g.w, g.n) + np.bincount(g.v, g.w, g.n)
        after = np.bincount(g.u, new_w, g.n) + np.bincount(g.v, new_w, g.n)
        if not np.array_equal(before, after):
            failures.append(f"{e.name}: weighted degrees changed")
    return CriterionResult("7", "cycle decomposition structure", not failures,
                           f"{stats['graphs']} graphs, {stats['cycles']} cycles, "
                           f"max length/bound {stats['max_len_ratio']:.2f}, failures {len(failures)}",
                           {"failures": failures, **stats})


# ------------------------------------------------------------------ 8

def _small_contraction_graphs(count: int):
    rng = np.random.default_rng(88)
    out = []
    for i in range(count):
        n = int(rng.integers(8, 17))
        g = gen.gnp(n, float(rng.uniform(0.3, 0.7)), 800 + i)
        if not g.is_connected():
            continue
        w = rng.integers(1, 4, g.m).astype(float)
        out.append(g.with_weights(w))
    return out


@_timed
def criterion_8(quick=False, alpha=1.1):
    """Contraction family completeness, size bound and the column-negation invariant."""
    graphs = _small_contraction_graphs(6 if quick else 30)
    seeds = 3 if quick else 10
    complete = total = oversize = 0
    for g in graphs:
        truth = brute_force_cut_family(g, alpha)
        for s in range(seeds):
            fam = enumerate_approx_min_cuts(g, alpha, default_reps(g.n), s, exhaustive_n=base_size(alpha))
            total += 1
            complete += set(truth) <= set(fam.cuts)
            oversize += len(fam) > len(truth)
    worst = 0.0
    for i, g in enumerate(graphs[:3 if quick else 8]):
        sk = JLIncidenceSketch(g.n, jl_rows(g.n, 0.5), 90 + i)
        sk.absorb_graph(g)
        fam = enumerate_approx_min_cuts(g, alpha, 4 if quick else default_reps(g.n), i, sketch=sk,
                                        exhaustive_n=base_size(alpha))
        worst = max(worst, fam.stats["negation_violation"])
    rate = complete / total
    ok = rate >= 0.95 and oversize == 0 and worst <= 1e-6
    return CriterionResult("8", "contraction enumeration", bool(ok),
                           f"complete in {rate:.1%} of {total} (graph, seed) runs, oversize {oversize}, "
                           f"max negation residual {worst:.1e}",
                           {"rate": rate, "oversize": oversize, "negation": worst})


# ------------------------------------------------------------------ 9

@_timed
def criterion_9(quick=False, eps=1 / 12):
    """Gadget ground truth vs Stoer-Wagner, the cut floor and bit recovery by the pipeline."""
    rng = np.random.default_rng(99)
    draws = 10 if quick else 50
    exact_ok = 0
    for _ in range(draws):
        _, _, h = gen.random_gadget_draw(rng, 15, lambda b, i: gen.gen_hard_exact(6, b, i))
        exact_ok += stoer_wagner_min_cut(h.graph)[0] == h.truth["min_cut"]
    e = gen.admissible_eps(eps)
    nbits = gen.approx_bits_length(e, 2)
    approx_ok = 0
    instances = []
    for _ in range(draws):
        _, _, h = gen.random_gadget_draw(rng, nbits, lambda b, i: gen.gen_hard_approx(e, b, i))
        approx_ok += stoer_wagner_min_cut(h.graph)[0] == h.truth["min_cut"]
        instances.append(h)
    floor_viol = []
    for h in instances[:1 if quick else 4]:
        t = h.truth
        low = cuts_below(h.graph, t["cut_floor"])
        allowed = {Cut.from_vertices(h.graph.n, t[k]).canonical().key() for k in ("c1_side", "c2_side")}
        extra = {side: v for side, v in low.items() if side not in allowed}
        if extra:
            floor_viol.append({"index": t["index"], "floor": t["cut_floor"],
                               "below": sorted(extra.values())})
    recover = 0
    runs = 0
    for s, h in enumerate(instances[:10 if quick else 40]):
        t = h.truth
        res = approx_min_cut_stream(EdgeStream(h.graph.n, h.graph.edges()), float(e), seed=s)
        guess = int(res.value < t["deg_a"] + t["deg_b"] - 1.5)
        recover += guess == t["bit"]
        runs += 1
    ok = (exact_ok == draws and approx_ok == draws and not floor_viol and recover / runs >= 0.95)
    return CriterionResult("9", "lower-bound gadgets", bool(ok),
                           f"exact gadget {exact_ok}/{draws}, approx gadget (eps={e}) {approx_ok}/{draws}, "
                           f"floor {3 * int(1 / (4 * e)) - 1} violated on {len(floor_viol)} scanned instances, "
                           f"bit recovered {recover}/{runs}",
                           {"floor_violations": floor_viol})


CRITERIA = {
    "1": criterion_1, "2": criterion_2, "3": criterion_3, "4": criterion_4, "5": criterion_5,
    "6": criterion_6, "7": criterion_7, "8": criterion_8, "9": criterion_9,
}


def run(ids=None, quick: bool = False, echo=None) -> list[CriterionResult]:
    out = []
    for cid in ids or list(CRITERIA):
        res = CRITERIA[str(cid)](quick=quick)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out

"""Single-pass (1+eps)-approximate global minimum cut.

One pass feeds every edge to two streaming sparsifiers: a for-all one at
constant-ish accuracy (candidate generation) and a for-each one at the target
accuracy (candidate scoring). Afterwards the candidates are the near-minimum
cuts of the for-all sparsifier, and each is scored by the median of several
JL sketches of the for-each sparsifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .contraction import EXHAUSTIVE_N, enumerate_approx_min_cuts, evaluate_with_sketches
from .graph import Cut
from .linalg import AMPLIFY_COPIES, C_JL, JLIncidenceSketch, jl_rows
from .stream import EdgeStream, SpaceMeter, StreamConfig, StreamingSparsifier
from .sparsify import Kind


@dataclass
class MinCutConfig:
    alpha_c: float = 1.0          # alpha = 1 + alpha_c / ln n
    reps: int | None = None       # contraction repetitions, default ceil(8 ln^2 n)
    copies: int = AMPLIFY_COPIES  # JL sketches for median amplification
    c_jl: float = C_JL
    coarse: bool = False          # constant-accuracy candidates at alpha = 1.5
    coarse_eps: float = 0.5
    exhaustive_n: int = EXHAUSTIVE_N
    stream: StreamConfig = field(default_factory=StreamConfig)


@dataclass
class MinCutResult:
    value: float
    cut: Cut
    crossing_edges: list[int]
    meta: dict

    def to_json(self, edges=None) -> dict:
        out = {
            "value": self.value,
            "side": self.cut.vertices(),
            "crossing_edges": self.crossing_edges,
            "space_words_peak": self.meta.get("space_words_peak", 0),
            "family_size": self.meta.get("family_size", 0),
        }
        if edges is not None:
            out["crossing_edges"] = [list(edges[i][:2]) for i in self.crossing_edges]
        return out


def _log(n: int) -> float:
    return max(1.0, math.log(n))


def approx_min_cut_stream(stream: EdgeStream, eps: float, seed: int,
                          config: MinCutConfig | None = None,
                          meter: SpaceMeter | None = None) -> MinCutResult:
    cfg = config or MinCutConfig()
    n = stream.n
    meter = meter if meter is not None else SpaceMeter()
    eps_k = cfg.coarse_eps if cfg.coarse else min(0.5, 1.0 / _log(n))
    alpha = 1.5 if cfg.coarse else 1.0 + cfg.alpha_c / _log(n)
    forall = StreamingSparsifier(n, eps_k, seed, Kind.FOR_ALL, cfg.stream, meter, "forall")
    foreach = StreamingSparsifier(n, eps, seed + 7919, Kind.FOR_EACH, cfg.stream, meter, "foreach")
    conn = DisjointSet(range(n))
    meter.set("connectivity", n)
    for eid, u, v, w in stream:
        meter.tick()
        conn.merge(u, v)
        forall.push(eid, u, v, w)
        foreach.push(eid, u, v, w)
    K = forall.finish()
    H = foreach.finish()
    meta = {"eps": eps, "eps_forall": eps_k, "alpha": alpha, "seed": seed,
            "forall_edges": K.graph.m, "foreach_edges": H.graph.m,
            "fallback": bool(K.fallback or H.fallback)}

    if conn.n_subsets > 1:
        root = conn[0]
        side = [x for x in range(n) if conn[x] == root]
        meta.update({"disconnected": True, "family_size": 0, "space_words_peak": meter.peak})
        return MinCutResult(0.0, Cut.from_vertices(n, side, 0.0).canonical(), [], meta)

    k = jl_rows(n, eps, cfg.c_jl)
    sketches = []
    for i in range(cfg.copies):
        sk = JLIncidenceSketch(n, k, seed * 1_000_033 + i)
        sk.absorb_graph(H.graph, H.source_edge_ids)
        sketches.append(sk)
    meter.set("jl_sketches", cfg.copies * k * n)

    fam = enumerate_approx_min_cuts(K.graph, alpha, cfg.reps, seed, exhaustive_n=cfg.exhaustive_n)
    meter.set("cut_family", len(fam) * ((n + 63) // 64 + 1))
    scored = evaluate_with_sketches(fam, sketches)
    best = scored.argmin()
    mask = best.mask()
    hg = H.graph
    cross = np.flatnonzero(mask[hg.u] != mask[hg.v])
    meta.update({
        "disconnected": False,
        "family_size": len(fam),
        "family_size_scored": len(scored),
        "family_size_bound": fam.size_bound(),
        "reps": fam.stats.get("reps"),
        "k": k,
        "space_words_peak": meter.peak,
        "forall_value": fam.cuts.get(best.key()),
    })
    crossing = sorted(int(x) for x in H.source_edge_ids[cross])
    return MinCutResult(float(best.value), best, crossing, meta)

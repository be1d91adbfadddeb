"""Offline sparsifiers.

``forall_sparsify`` is independent leverage-score sampling. ``spectral_sketch``
is the degree-preserving graphical sketch: light edges are grouped by weight,
decomposed into short even cycles, and each cycle keeps either its odd- or its
even-indexed edges at doubled weight.

Sampling probabilities are rounded up to powers of two so that reweighted
edges stay in a handful of exact weight classes.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .graph import WeightedGraph, write_graph
from .linalg import approx_leverage


class Kind(str, Enum):
    FOR_ALL = "for_all"
    FOR_EACH = "for_each"


@dataclass
class SketchConfig:
    c_forall: float = 1.0       # oversampling for leverage sampling
    c_each: float = 4.0         # for-each edge target: c_each * n * log^3 n / eps
    heavy_factor: float = 4.0   # heavy threshold tau = eps / (heavy_factor * L_max)
    resistance_eps: float = 0.25
    round_slack: int = 8


@dataclass
class Sparsifier:
    graph: WeightedGraph
    kind: Kind
    eps: float
    seed: int
    source_edge_ids: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def fallback(self) -> bool:
        return bool(self.meta.get("fallback", False))

    def metadata(self) -> dict:
        return {
            "kind": self.kind.value,
            "eps": self.eps,
            "seed": self.seed,
            "fallback": self.fallback,
            "source_edge_ids": self.source_edge_ids.tolist(),
            **{k: v for k, v in self.meta.items() if k != "fallback"},
        }

    def save(self, path: str | Path) -> None:
        write_graph(self.graph, path, meta=self.metadata())


def pow2_ceil(p: np.ndarray) -> np.ndarray:
    """Round probabilities in (0, 1] up to the next power of two."""
    p = np.clip(np.asarray(p, dtype=np.float64), 1e-300, 1.0)
    return np.minimum(1.0, 2.0 ** np.ceil(np.log2(p)))


def _log(n: int) -> float:
    return max(1.0, math.log(n))


def _ids(g: WeightedGraph, source_ids) -> np.ndarray:
    return np.arange(g.m) if source_ids is None else np.asarray(source_ids, dtype=np.int64)


def forall_sparsify(g: WeightedGraph, eps: float, seed: int, c0: float = 1.0,
                    source_ids: np.ndarray | None = None) -> Sparsifier:
    """Independent sampling with p_e = min(1, c0 * w_e r_e * log n / eps^2)."""
    src = _ids(g, source_ids)
    if g.m == 0:
        return Sparsifier(g, Kind.FOR_ALL, eps, seed, src, {"sampled": False})
    rng = np.random.default_rng([seed, 0xA11])
    lev = approx_leverage(g, seed)
    p = pow2_ceil(c0 * lev * _log(g.n) / eps ** 2)
    keep = rng.random(g.m) < p
    h = WeightedGraph(g.n, g.u[keep], g.v[keep], g.w[keep] / p[keep])
    return Sparsifier(h, Kind.FOR_ALL, eps, seed, src[keep],
                      {"sampled": bool(np.any(p < 1.0))})


# ---------------------------------------------------------------- cycles

@dataclass
class CycleDecomposition:
    cycles: list[list[int]]
    leftover: list[int]
    parity_fixed: int
    l_max: int

    def check(self, m: int, n: int) -> None:
        """Raise AssertionError unless the structural invariants hold."""
        seen = np.zeros(m, dtype=np.int64)
        for c in self.cycles:
            assert len(c) % 2 == 0, "odd cycle survived the parity fix"
            assert 2 <= len(c) <= self.l_max, f"cycle of length {len(c)} > {self.l_max}"
            seen[c] += 1
        seen[self.leftover] += 1
        assert np.all(seen == 1), "edges are not exactly partitioned"
        assert len(self.leftover) <= 2 * n + self.parity_fixed


def max_cycle_length(n: int) -> int:
    return 2 * math.ceil(math.log2(max(n, 2))) + 1


def short_cycle_decompose(g: WeightedGraph) -> CycleDecomposition:
    """Peel-and-BFS decomposition into edge-disjoint short even cycles plus leftovers.

    Weights are ignored. Vertices of degree <= 1 are peeled first; a BFS from
    the lowest live vertex then looks for a short even cycle. If the shortest
    closure it finds is odd, one of its edges goes to leftover and the rest stay
    in play. When no short cycle exists, all degree <= 2 vertices are peeled,
    after which min degree >= 3 guarantees one within 2*ceil(log2 n) + 1.
    """
    n, m = g.n, g.m
    l_max = max_cycle_length(n)
    eu, ev = g.u.tolist(), g.v.tolist()
    inc: list[set[int]] = [set() for _ in range(n)]
    for e in range(m):
        inc[eu[e]].add(e)
        inc[ev[e]].add(e)
    live_edges = m
    leftover: list[int] = []
    cycles: list[list[int]] = []
    fixed = 0

    def drop(e: int) -> None:
        nonlocal live_edges
        inc[eu[e]].discard(e)
        inc[ev[e]].discard(e)
        live_edges -= 1

    def peel(max_deg: int) -> None:
        queue = deque(x for x in range(n) if 0 < len(inc[x]) <= max_deg)
        while queue:
            x = queue.popleft()
            if not 0 < len(inc[x]) <= max_deg:
                continue
            for e in list(inc[x]):
                y = ev[e] if eu[e] == x else eu[e]
                drop(e)
                leftover.append(e)
                if 0 < len(inc[y]) <= max_deg:
                    queue.append(y)

    start = 0
    while True:
        peel(1)
        if live_edges == 0:
            break
        while not inc[start]:
            start += 1
        found = _bfs_cycle(start, inc, eu, ev, l_max)
        if found is None:
            peel(2)
            continue
        cyc, odd = found
        if odd:
            e = cyc[-1]
            drop(e)
            leftover.append(e)
            fixed += 1
            continue
        for e in cyc:
            drop(e)
        cycles.append(cyc)
    return CycleDecomposition(cycles, leftover, fixed, l_max)


def _bfs_cycle(s: int, inc, eu, ev, l_max: int):
    """Shortest-ish closure found by BFS from s; prefers even cycles.

    Returns (edge ids in walk order, is_odd) or None if nothing within l_max.
    """
    parent_edge = {s: -1}
    depth = {s: 0}
    parent = {s: -1}
    queue = deque([s])
    odd_best = None
    while queue:
        x = queue.popleft()
        if odd_best is not None and depth[x] > odd_best[2]:
            break
        for e in inc[x]:
            if e == parent_edge[x]:
                continue
            y = ev[e] if eu[e] == x else eu[e]
            if y not in depth:
                depth[y] = depth[x] + 1
                parent[y] = x
                parent_edge[y] = e
                queue.append(y)
                continue
            length_bound = depth[x] + depth[y] + 1
            if length_bound > l_max:
                continue
            if (depth[x] + depth[y]) % 2 == 1:
                return _close(x, y, e, parent, parent_edge, depth), False
            if odd_best is None:
                odd_best = (x, y, depth[x], e)
    if odd_best is None:
        return None
    x, y, _, e = odd_best
    return _close(x, y, e, parent, parent_edge, depth), True


def _close(x, y, e, parent, parent_edge, depth) -> list[int]:
    up_x, up_y = [], []
    a, b = x, y
    while depth[a] > depth[b]:
        up_x.append(parent_edge[a])
        a = parent[a]
    while depth[b] > depth[a]:
        up_y.append(parent_edge[b])
        b = parent[b]
    while a != b:
        up_x.append(parent_edge[a])
        a = parent[a]
        up_y.append(parent_edge[b])
        b = parent[b]
    return up_x + up_y[::-1] + [e]


def sample_cycles(w: np.ndarray, cycles: list[list[int]], rng: np.random.Generator) -> np.ndarray:
    """Each cycle keeps its even- or odd-indexed edges (fair coin) at double weight."""
    out = np.array(w, dtype=np.float64, copy=True)
    coins = rng.integers(0, 2, size=len(cycles))
    for cyc, coin in zip(cycles, coins):
        cyc = np.asarray(cyc)
        out[cyc[coin::2]] *= 2.0
        out[cyc[1 - coin::2]] = 0.0
    return out


def sketch_round(g: WeightedGraph, lev: np.ndarray, tau: float, rng: np.random.Generator):
    """One halving round. Returns (new weights with zeros for dropped edges, buckets).

    Light edges crossing a fresh random vertex 2-colouring are decomposed per
    exact weight class; the bipartite subgraphs have only even cycles.
    """
    color = rng.integers(0, 2, size=g.n)
    cand = (lev < tau) & (color[g.u] != color[g.v])
    new_w = g.w.copy()
    buckets = []
    for val in np.unique(g.w[cand]):
        idx = np.flatnonzero(cand & (g.w == val))
        if len(idx) < 2:
            continue
        dec = short_cycle_decompose(g.subgraph_edges(idx))
        if not dec.cycles:
            continue
        new_w[idx] = sample_cycles(g.w[idx], dec.cycles, rng)
        buckets.append(idx)
    return new_w, buckets


def foreach_target(n: int, eps: float, c_each: float) -> int:
    return math.ceil(c_each * n * _log(n) ** 3 / eps)


def spectral_sketch(g: WeightedGraph, eps: float, seed: int, config: SketchConfig | None = None,
                    source_ids: np.ndarray | None = None) -> Sparsifier:
    cfg = config or SketchConfig()
    src = _ids(g, source_ids)
    target = foreach_target(g.n, eps, cfg.c_each)
    meta = {"target": target, "rounds": 0, "fallback": False}
    if g.m <= target:
        return Sparsifier(g, Kind.FOR_EACH, eps, seed, src, meta)
    rng = np.random.default_rng([seed, 0xEAC4])
    l_max = max_cycle_length(g.n)
    tau = eps / (cfg.heavy_factor * l_max)
    cap = math.ceil(math.log2(g.m)) + cfg.round_slack
    cur, cur_src = g, src
    while cur.m > target:
        if meta["rounds"] >= cap:
            meta["fallback"] = True
            break
        sub_seed = int(rng.integers(2 ** 62))
        k = forall_sparsify(cur, cfg.resistance_eps, sub_seed, cfg.c_forall)
        lev = approx_leverage(cur, sub_seed + 1, estimator=k.graph)
        if not np.any(lev < tau):
            meta["fallback"] = True
            break
        new_w, _ = sketch_round(cur, lev, tau, rng)
        keep = new_w > 0
        cur = WeightedGraph(cur.n, cur.u[keep], cur.v[keep], new_w[keep])
        cur_src = cur_src[keep]
        meta["rounds"] += 1
    if meta["fallback"] and cur.m > target:
        lev = approx_leverage(cur, int(rng.integers(2 ** 62)))
        p = pow2_ceil(np.minimum(1.0, target * lev / max(lev.sum(), 1e-300)))
        keep = rng.random(cur.m) < p
        cur = WeightedGraph(cur.n, cur.u[keep], cur.v[keep], cur.w[keep] / p[keep])
        cur_src = cur_src[keep]
    return Sparsifier(cur, Kind.FOR_EACH, eps, seed, cur_src, meta)


def load_metadata(path: str | Path) -> dict:
    return json.loads(Path(str(path) + ".json").read_text())

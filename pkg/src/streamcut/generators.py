"""Seeded instance generators, corpus files and the lower-bound gadgets.

Every generator is a pure function of its parameters and seed.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import networkx as nx
import numpy as np

from .graph import GraphError, WeightedGraph, format_graph, write_graph


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag])


def _unit(n: int, pairs) -> WeightedGraph:
    pairs = list(pairs)
    return WeightedGraph.from_edges(n, [(a, b, 1.0) for a, b in pairs], simple=True)


def _gnp_pairs(n: int, p: float, rng, offset: int = 0) -> list[tuple[int, int]]:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return list(zip((iu[keep] + offset).tolist(), (ju[keep] + offset).tolist()))


def gnp(n: int, p: float, seed: int) -> WeightedGraph:
    if n < 2 or not 0 < p <= 1:
        raise GraphError("gnp needs n >= 2 and 0 < p <= 1")
    return _unit(n, _gnp_pairs(n, p, _rng(seed, 1)))


def dumbbell(k: int, seed: int = 0) -> WeightedGraph:
    """Two k-cliques joined by one bridge; min cut 1."""
    if k < 2:
        raise GraphError("dumbbell needs k >= 2")
    left = list(combinations(range(k), 2))
    right = [(a + k, b + k) for a, b in left]
    return _unit(2 * k, left + right + [(k - 1, k)])


def cycle(n: int, seed: int = 0) -> WeightedGraph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return _unit(n, [(i, (i + 1) % n) for i in range(n)])


def planted_bisection(n: int, p_in: float = 0.35, cut: int | None = None, seed: int = 0) -> WeightedGraph:
    """Two G(n/2, p_in) halves plus `cut` distinct random crossing edges.

    `cut` defaults to ceil(3 log2 n), which is above 3 ln n as well.
    """
    if n < 4 or n % 2:
        raise GraphError("planted bisection needs an even n >= 4")
    half = n // 2
    cut = math.ceil(3 * math.log2(n)) if cut is None else cut
    if not 0 < cut <= half * half:
        raise GraphError("cut size out of range")
    rng = _rng(seed, 2)
    pairs = _gnp_pairs(half, p_in, rng) + _gnp_pairs(half, p_in, rng, half)
    flat = rng.choice(half * half, size=cut, replace=False)
    pairs += [(int(x // half), int(half + x % half)) for x in np.sort(flat)]
    return _unit(n, pairs)


def kedge_layered(layers: int = 4, size: int = 12, k: int = 3, p: float = 0.8, seed: int = 0) -> WeightedGraph:
    """Dense G(size, p) layers in a path, consecutive layers joined by k random edges."""
    if layers < 2 or size < 2 or not 0 < k <= size * size:
        raise GraphError("invalid layered parameters")
    rng = _rng(seed, 3)
    pairs = []
    for i in range(layers):
        pairs += _gnp_pairs(size, p, rng, i * size)
    for i in range(layers - 1):
        flat = rng.choice(size * size, size=k, replace=False)
        pairs += [(int(i * size + x // size), int((i + 1) * size + x % size)) for x in np.sort(flat)]
    return _unit(layers * size, pairs)


def regular(n: int, d: int = 4, seed: int = 0) -> WeightedGraph:
    g = nx.random_regular_graph(d, n, seed=seed)
    return _unit(n, sorted(tuple(sorted(e)) for e in g.edges()))


GENERATORS = {
    "gnp": gnp,
    "dumbbell": dumbbell,
    "cycle": cycle,
    "planted-bisection": planted_bisection,
    "kedge-layered": kedge_layered,
    "regular": regular,
}


def generate(kind: str, params: dict, seed: int) -> WeightedGraph:
    try:
        fn = GENERATORS[kind]
    except KeyError:
        raise GraphError(f"unknown generator kind {kind!r}") from None
    try:
        return fn(**params, seed=seed)
    except TypeError as exc:
        raise GraphError(f"invalid params for {kind}: {exc}") from None


def graph_digest(g: WeightedGraph) -> str:
    return hashlib.sha256(format_graph(g).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CorpusEntry:
    kind: str
    params: dict = field(hash=False)
    seed: int = 0

    @property
    def name(self) -> str:
        tail = "_".join(f"{k}{v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}_{tail}_s{self.seed}"

    def build(self) -> WeightedGraph:
        return generate(self.kind, self.params, self.seed)


def gen_corpus(entries: list[CorpusEntry], outdir: str | Path) -> Path:
    """Write each graph plus a manifest.json recording params and digests."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for e in entries:
        g = e.build()
        path = outdir / f"{e.name}.txt"
        write_graph(g, path)
        manifest.append({"file": path.name, "kind": e.kind, "params": e.params, "seed": e.seed,
                         "n": g.n, "m": g.m, "sha256_16": graph_digest(g)})
    mpath = outdir / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return mpath


def mincut_corpus(size: int = 50) -> list[CorpusEntry]:
    """Mixed corpus for the end-to-end approximate min cut check.

    A handful of n=300 instances (the slowest ones), the rest at n=100 or
    similar size.
    """
    out = []
    for s in range(10):
        out.append(CorpusEntry("gnp", {"n": 100, "p": 0.1}, s))
    for s in range(6):
        out.append(CorpusEntry("gnp", {"n": 300, "p": 0.05}, s))
    for s, k in enumerate([8, 10, 12, 15, 20, 25, 30, 40, 50, 60]):
        out.append(CorpusEntry("dumbbell", {"k": k}, s))
    for s in range(12):
        out.append(CorpusEntry("planted-bisection", {"n": 100, "p_in": 0.4}, s))
    for s in range(6):
        out.append(CorpusEntry("kedge-layered", {"layers": 4, "size": 20, "k": 3 + s % 3}, s))
    for s in range(6):
        out.append(CorpusEntry("gnp", {"n": 150, "p": 0.08}, 100 + s))
    return out[:size]


def structure_corpus() -> list[CorpusEntry]:
    """Small graphs of every kind, used for the structural checks."""
    return [
        CorpusEntry("gnp", {"n": 40, "p": 0.3}, 1),
        CorpusEntry("gnp", {"n": 100, "p": 0.1}, 2),
        CorpusEntry("dumbbell", {"k": 12}, 0),
        CorpusEntry("cycle", {"n": 30}, 0),
        CorpusEntry("planted-bisection", {"n": 64, "p_in": 0.4}, 3),
        CorpusEntry("kedge-layered", {"layers": 3, "size": 10, "k": 2}, 4),
        CorpusEntry("regular", {"n": 50, "d": 4}, 5),
    ]


# ----------------------------------------------------------------- gadgets

def pair_of_index(n: int, index: int) -> tuple[int, int]:
    """Upper-triangle pair (a, b), a < b, at position index in row-major order."""
    total = n * (n - 1) // 2
    if not 0 <= index < total:
        raise GraphError(f"index {index} outside [0, {total})")
    a = 0
    row = n - 1
    while index >= row:
        index -= row
        a += 1
        row -= 1
    return a, a + 1 + index


def _bits_graph(n: int, bits, offset: int = 0) -> list[tuple[int, int]]:
    bits = np.asarray(bits, dtype=np.int64)
    if len(bits) != n * (n - 1) // 2:
        raise GraphError(f"need {n * (n - 1) // 2} bits for n={n}, got {len(bits)}")
    iu, ju = np.triu_indices(n, 1)
    on = bits != 0
    return list(zip((iu[on] + offset).tolist(), (ju[on] + offset).tolist()))


@dataclass
class HardInstance:
    graph: WeightedGraph
    truth: dict
    split: int  # edges before this position are the first party's

    def ground_truth(self) -> dict:
        return dict(self.truth)


def _attach(pairs, a, b, others, s_ids, t_ids, c, deg_a, deg_b):
    """Joins S to {a, b}, T to `others`, and c to deg_a + deg_b - 1 vertices.

    c takes the lowest ids of `others` first and spills into T when those run
    out; T sits on c's side of C1, so the spill changes neither candidate cut.
    """
    need = deg_a + deg_b - 1
    if need < 1:
        raise GraphError("degenerate target: deg(a) + deg(b) <= 1")
    pool = sorted(others) + sorted(t_ids)
    if need > len(pool):
        raise GraphError("not enough vertices to attach c")
    pairs += [(s, x) for s in s_ids for x in (a, b)]
    pairs += [(t, x) for t in t_ids for x in others]
    pairs += [(min(c, x), max(c, x)) for x in pool[:need]]
    return need


def gen_hard_exact(n: int, bits, index: int, seed: int = 0) -> HardInstance:
    """Exact-cut gadget on 7n + 1 vertices: G, cliques S and T of 3n, and c."""
    base = _bits_graph(n, bits)
    a, b = pair_of_index(n, index)
    deg = np.zeros(n, dtype=np.int64)
    for x, y in base:
        deg[x] += 1
        deg[y] += 1
    s_ids = list(range(n, 4 * n))
    t_ids = list(range(4 * n, 7 * n))
    c = 7 * n
    gadget = list(combinations(s_ids, 2)) + list(combinations(t_ids, 2))
    others = [x for x in range(n) if x not in (a, b)]
    need = _attach(gadget, a, b, others, s_ids, t_ids, c, int(deg[a]), int(deg[b]))
    bit = int(np.asarray(bits)[index] != 0)
    d = int(deg[a] + deg[b])
    truth = {"n": n, "index": index, "a": a, "b": b, "bit": bit, "deg_a": int(deg[a]),
             "deg_b": int(deg[b]), "c_joins": need, "c1_value": d - 2 * bit, "c2_value": d - 1,
             "min_cut": d - 1 - bit, "total_vertices": 7 * n + 1,
             "c1_side": sorted(s_ids + [a, b]), "c2_side": [c]}
    return HardInstance(_unit(7 * n + 1, base + gadget), truth, len(base))


def admissible_eps(eps: float) -> Fraction:
    """Largest eps' <= eps with 1/(4 eps') a positive integer >= 2."""
    if not 0 < eps <= 0.125:
        raise GraphError("eps must lie in (0, 1/8]")
    k = max(2, math.ceil(round(1 / (4 * eps), 9)))
    return Fraction(1, 4 * k)


def approx_bits_length(eps, blocks: int) -> int:
    k = int(1 / (4 * Fraction(eps)))
    return blocks * k * (k - 1) // 2


def gen_hard_approx(eps, bits, index: int, seed: int = 0, blocks: int = 2) -> HardInstance:
    """Approximate-cut gadget: `blocks` disjoint graphs of 1/(4 eps) vertices, cliques of 3/(4 eps).

    Non-target blocks are joined wholesale to S or T, alternating in block
    order starting with S.
    """
    eps = Fraction(eps).limit_denominator(10_000)
    inv = 1 / (4 * eps)
    if inv.denominator != 1 or inv < 2:
        raise GraphError(f"eps={eps} gives a non-integral block size")
    k = int(inv)
    if blocks < 2:
        raise GraphError("need at least two blocks")
    per = k * (k - 1) // 2
    bits = np.asarray(bits, dtype=np.int64)
    if len(bits) != blocks * per:
        raise GraphError(f"need {blocks * per} bits, got {len(bits)}")
    nv = blocks * k
    base = []
    for i in range(blocks):
        base += _bits_graph(k, bits[i * per:(i + 1) * per], i * k)
    target, local = divmod(index, per)
    if not 0 <= target < blocks:
        raise GraphError("index out of range")
    la, lb = pair_of_index(k, local)
    a, b = target * k + la, target * k + lb
    deg = np.zeros(nv, dtype=np.int64)
    for x, y in base:
        deg[x] += 1
        deg[y] += 1
    q = 3 * k
    s_ids = list(range(nv, nv + q))
    t_ids = list(range(nv + q, nv + 2 * q))
    c = nv + 2 * q
    gadget = list(combinations(s_ids, 2)) + list(combinations(t_ids, 2))
    others = [x for x in range(target * k, (target + 1) * k) if x not in (a, b)]
    need = _attach(gadget, a, b, others, s_ids, t_ids, c, int(deg[a]), int(deg[b]))
    side_of = {}
    toggle = 0
    for i in range(blocks):
        if i == target:
            continue
        side_of[i] = "S" if toggle % 2 == 0 else "T"
        toggle += 1
        hub = s_ids if side_of[i] == "S" else t_ids
        gadget += [(x, h) for x in range(i * k, (i + 1) * k) for h in hub]
    bit = int(bits[index] != 0)
    d = int(deg[a] + deg[b])
    truth = {"eps": str(eps), "k": k, "blocks": blocks, "index": index, "target_block": target,
             "a": a, "b": b, "bit": bit, "deg_a": int(deg[a]), "deg_b": int(deg[b]), "c_joins": need,
             "c1_value": d - 2 * bit, "c2_value": d - 1, "min_cut": d - 1 - bit,
             "cut_floor": 3 * k - 1, "block_sides": side_of, "total_vertices": c + 1,
             "c1_side": sorted(s_ids + [a, b] + [x for i, sd in side_of.items() if sd == "S"
                                                for x in range(i * k, (i + 1) * k)]),
             "c2_side": [c]}
    return HardInstance(_unit(c + 1, base + gadget), truth, len(base))


def random_gadget_draw(rng: np.random.Generator, nbits: int, builder, tries: int = 1000):
    """Draws (bits, index) uniformly, redrawing degenerate targets."""
    for _ in range(tries):
        bits = rng.integers(0, 2, nbits)
        index = int(rng.integers(nbits))
        try:
            return bits, index, builder(bits, index)
        except GraphError as exc:
            if "degenerate" not in str(exc) and "not enough" not in str(exc):
                raise
    raise GraphError("no admissible draw found")

"""Single-pass insertion-only engine: online sampling feeding a merge-and-reduce tower."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .graph import WeightedGraph, weight_cap
from .linalg import leverage_rows, pair_resistances, resistance_embedding, SolverError
from .sparsify import Kind, SketchConfig, Sparsifier, forall_sparsify, pow2_ceil, spectral_sketch

WORDS_PER_EDGE = 4  # u, v, w, source id


class StreamError(RuntimeError):
    pass


class EdgeStream:
    """Forward-only stream of (edge id, u, v, w); edge ids are the input line numbers.

    Iterating a second time raises, and ``visits`` counts handed-out elements.
    """

    def __init__(self, n: int, edges, shuffle: int | None = None, simple: bool = False):
        self.n = n
        self.simple = simple
        self._edges = [(int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0) for e in edges]
        self._order = np.arange(len(self._edges))
        if shuffle is not None:
            self._order = np.random.default_rng(shuffle).permutation(len(self._edges))
        self.visits = np.zeros(len(self._edges), dtype=np.int64)
        self._consumed = False

    @classmethod
    def from_graph(cls, g: WeightedGraph, shuffle: int | None = None) -> "EdgeStream":
        return cls(g.n, g.edges(), shuffle=shuffle, simple=g.simple_flag)

    def __len__(self) -> int:
        return len(self._edges)

    def __iter__(self) -> Iterator[tuple[int, int, int, float]]:
        if self._consumed:
            raise StreamError("stream already consumed; single pass only")
        self._consumed = True
        for i in self._order:
            self.visits[i] += 1
            u, v, w = self._edges[i]
            yield int(i), u, v, w


class SpaceMeter:
    """Word-level accounting of live algorithm state, per component."""

    def __init__(self):
        self.parts: dict[str, int] = {}
        self.live = 0
        self.peak = 0
        self.peak_parts: dict[str, int] = {}
        self.step = 0
        self.history: list[tuple[int, int, int, str]] = []

    def set(self, component: str, words: int) -> None:
        self.live += words - self.parts.get(component, 0)
        self.parts[component] = words
        if self.live > self.peak:
            self.peak = self.live
            self.peak_parts = dict(self.parts)
        self.history.append((self.step, self.live, self.peak, component))

    def tick(self) -> None:
        self.step += 1

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["step", "live_words", "peak_words", "component"])
            out.writerows(self.history)


@dataclass
class StreamConfig:
    c_online: float = 1.0       # oversampling constant of the online sampler
    space_exponent: float = 3.0  # m_space = n log^c n / eps
    m_space: int | None = None  # explicit override of the block size
    oversample: float = 1.0     # extra multiplier on online probabilities
    refresh_min: int | None = None  # sampled edges before the first estimator build (default n)
    sketch: SketchConfig = field(default_factory=SketchConfig)


class OnlineSampler:
    """Online leverage-score sampling; decisions are final once made.

    Resistances are read from a JL embedding of the current substrate graph,
    rebuilt whenever the number of sampled edges doubles. A stale substrate
    has fewer edges, so by Rayleigh monotonicity its resistances only
    over-estimate, which errs toward keeping edges.
    """

    def __init__(self, n: int, eps: float, seed: int, substrate: Callable[[], WeightedGraph],
                 c0: float = 1.0, oversample: float = 1.0, refresh_min: int | None = None,
                 meter: SpaceMeter | None = None, name: str = "sampler"):
        self.n = n
        self.eps = eps
        self.seed = seed
        self.c0 = c0 * oversample
        self.lam = 1.0 / weight_cap(n)
        self.substrate = substrate
        self.meter = meter
        self.name = name
        self.rng = np.random.default_rng([seed, 0x0515])
        self.scale = self.c0 * max(1.0, math.log(n)) ** 2 / eps ** 2
        self.refresh_min = refresh_min if refresh_min is not None else n
        self.kept = 0
        self.seen = 0
        self.failures = 0
        self._z = None
        self._labels = None
        self._last_refresh = 0

    def _refresh(self) -> None:
        g = self.substrate()
        try:
            self._z, self._labels = resistance_embedding(g, leverage_rows(self.n), self.seed + self.kept)
        except SolverError:
            self.failures += 1
            self._z = None
        self._last_refresh = self.kept
        if self.meter is not None:
            words = 0 if self._z is None else self._z.size + self.n
            self.meter.set(self.name, words)

    def resistance(self, u: int, v: int) -> float:
        if self._z is None or self._labels[u] != self._labels[v]:
            return 2.0 / self.lam
        return float(pair_resistances(self._z, self._labels, np.array([u]), np.array([v]))[0])

    def sample(self, u: int, v: int, w: float) -> tuple[bool, float, float]:
        """Returns (kept, reweighted weight, probability)."""
        self.seen += 1
        if self.kept - self._last_refresh >= max(self.refresh_min, self._last_refresh):
            self._refresh()
        r = self.resistance(u, v)
        p = float(pow2_ceil(min(1.0, self.scale * w * r)))
        if p >= 1.0 or self.rng.random() < p:
            self.kept += 1
            return True, w / p, p
        return False, 0.0, p


Reducer = Callable[[WeightedGraph, float, int, np.ndarray], Sparsifier]


@dataclass
class Block:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    src: np.ndarray
    depth: int

    def __len__(self) -> int:
        return len(self.u)


class BlockTower:
    """Merge-and-reduce over blocks B_0..B_L.

    B_0 buffers raw sampled edges. When it is full the minimal empty index i
    receives reduce(B_0 u ... u B_{i-1}) at per-level accuracy eps_blk, chosen
    so that (1 + eps_blk)^L = 1 + eps exactly.
    """

    def __init__(self, n: int, eps: float, seed: int, reducer: Reducer, m_space: int,
                 meter: SpaceMeter | None = None, name: str = "tower"):
        self.n = n
        self.eps = eps
        self.seed = seed
        self.reducer = reducer
        self.m_space = m_space
        self.levels = max(1, math.ceil(math.log2(n / eps)))
        self.eps_blk = (1.0 + eps) ** (1.0 / self.levels) - 1.0
        self.blocks: list[Block | None] = [None] * (self.levels + 1)
        self._buf: list[tuple[int, int, float, int]] = []
        self.meter = meter
        self.name = name
        self.trace: list[dict] = []
        self.fallbacks = 0
        self.overflows = 0  # cascades into an already full top block: depth then exceeds levels
        self._reductions = 0

    def _meter(self, extra: int = 0) -> None:
        if self.meter is None:
            return
        words = WORDS_PER_EDGE * (len(self._buf) + sum(len(b) for b in self.blocks[1:] if b is not None))
        self.meter.set(self.name, words)
        self.meter.set(self.name + ".reduce", extra)

    def push(self, u: int, v: int, w: float, src: int) -> None:
        if len(self._buf) >= self.m_space:
            self._cascade()
        self._buf.append((u, v, w, src))
        self._meter()

    def _buffer_block(self) -> Block:
        if not self._buf:
            z = np.zeros(0)
            return Block(z.astype(np.int64), z.astype(np.int64), z, z.astype(np.int64), 0)
        arr = np.array(self._buf, dtype=np.float64)
        return Block(arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2],
                     arr[:, 3].astype(np.int64), 0)

    def _cascade(self) -> None:
        i = next((j for j in range(1, self.levels + 1) if self.blocks[j] is None), None)
        if i is None:
            i = self.levels
            self.overflows += 1
        parts = [self._buffer_block()] + [b for b in self.blocks[1:i + 1] if b is not None]
        merged = _merge(parts)
        self._meter(extra=WORDS_PER_EDGE * len(merged))
        h = self._reduce(merged, self.eps_blk)
        depth = 1 + max(b.depth for b in parts)
        self.trace.append({"level": i, "inputs": len(merged), "outputs": h.graph.m, "depth": depth})
        for j in range(1, i):
            self.blocks[j] = None
        self.blocks[i] = Block(h.graph.u, h.graph.v, h.graph.w, h.source_edge_ids, depth)
        self._buf = []
        self._meter()

    def _reduce(self, merged: Block, eps: float) -> Sparsifier:
        g = WeightedGraph(self.n, merged.u, merged.v, merged.w)
        self._reductions += 1
        h = self.reducer(g, eps, self.seed * 1_000_003 + self._reductions, merged.src)
        self.fallbacks += int(h.fallback)
        return h

    def union(self) -> Block:
        return _merge([self._buffer_block()] + [b for b in self.blocks[1:] if b is not None])

    def union_graph(self) -> WeightedGraph:
        b = self.union()
        return WeightedGraph(self.n, b.u, b.v, b.w)

    def max_depth(self) -> int:
        return max([b.depth for b in self.blocks[1:] if b is not None], default=0)

    def finish(self, kind: Kind) -> Sparsifier:
        merged = self.union()
        self._meter(extra=WORDS_PER_EDGE * len(merged))
        h = self._reduce(merged, self.eps)
        depth = self.max_depth()
        factors = [1.0 + self.eps_blk] * depth
        meta = dict(h.meta)
        meta.update({
            "level_factors": factors,
            "tower_factor": float(np.prod(factors)) if factors else 1.0,
            "levels": self.levels,
            "eps_blk": self.eps_blk,
            "m_space": self.m_space,
            "cascades": len(self.trace),
            "overflows": self.overflows,
            "fallback": bool(h.fallback or self.fallbacks),
        })
        self._meter()
        return Sparsifier(h.graph, kind, self.eps, self.seed, h.source_edge_ids, meta)


def _merge(parts: list[Block]) -> Block:
    parts = [p for p in parts if len(p)]
    if not parts:
        z = np.zeros(0)
        return Block(z.astype(np.int64), z.astype(np.int64), z, z.astype(np.int64), 0)
    return Block(np.concatenate([p.u for p in parts]), np.concatenate([p.v for p in parts]),
                 np.concatenate([p.w for p in parts]), np.concatenate([p.src for p in parts]),
                 max(p.depth for p in parts))


def default_m_space(n: int, eps: float, exponent: float) -> int:
    return max(1, math.ceil(n * max(1.0, math.log(n)) ** exponent / eps))


class StreamingSparsifier:
    """Online sampler + block tower, consuming one edge at a time."""

    def __init__(self, n: int, eps: float, seed: int, kind: Kind,
                 config: StreamConfig | None = None, meter: SpaceMeter | None = None,
                 name: str | None = None):
        self.n = n
        self.eps = eps
        self.kind = kind
        self.config = cfg = config or StreamConfig()
        self.meter = meter if meter is not None else SpaceMeter()
        name = name or kind.value
        sk = cfg.sketch
        if kind is Kind.FOR_EACH:
            def reducer(g, e, s, src):
                return spectral_sketch(g, e, s, sk, source_ids=src)
        else:
            def reducer(g, e, s, src):
                return forall_sparsify(g, e, s, sk.c_forall, source_ids=src)
        m_space = cfg.m_space or default_m_space(n, eps, cfg.space_exponent)
        self.tower = BlockTower(n, eps, seed, reducer, m_space, self.meter, name + ".tower")
        self.sampler = OnlineSampler(n, eps, seed, self.tower.union_graph, cfg.c_online,
                                     cfg.oversample, cfg.refresh_min, self.meter, name + ".sampler")
        self.arrivals = 0

    def push(self, edge_id: int, u: int, v: int, w: float) -> tuple[bool, float]:
        self.arrivals += 1
        kept, w2, _ = self.sampler.sample(u, v, w)
        if kept:
            self.tower.push(u, v, w2, edge_id)
        return kept, w2

    def snapshot(self) -> WeightedGraph:
        return self.tower.union_graph()

    def finish(self) -> Sparsifier:
        h = self.tower.finish(self.kind)
        h.meta.update({"arrivals": self.arrivals, "sampled": self.sampler.kept,
                       "sampler_failures": self.sampler.failures})
        return h


def _run(stream: EdgeStream, eps: float, seed: int, kind: Kind, config, meter) -> Sparsifier:
    eng = StreamingSparsifier(stream.n, eps, seed, kind, config, meter)
    for eid, u, v, w in stream:
        eng.meter.tick()
        eng.push(eid, u, v, w)
    h = eng.finish()
    h.meta["space_words_peak"] = eng.meter.peak
    return h


def stream_foreach_sparsifier(stream: EdgeStream, eps: float, seed: int,
                              config: StreamConfig | None = None,
                              meter: SpaceMeter | None = None) -> Sparsifier:
    return _run(stream, eps, seed, Kind.FOR_EACH, config, meter)


def stream_forall_sparsifier(stream: EdgeStream, eps: float, seed: int,
                             config: StreamConfig | None = None,
                             meter: SpaceMeter | None = None) -> Sparsifier:
    return _run(stream, eps, seed, Kind.FOR_ALL, config, meter)

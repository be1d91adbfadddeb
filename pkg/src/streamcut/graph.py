"""Weighted undirected graphs, cuts, and Laplacian quadratic forms.

Edges live in three parallel numpy arrays (``u``, ``v``, ``w``); parallel
edges are allowed so contracted multigraphs share the same container.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

WEIGHT_CAP_EXPONENT = 6


class GraphError(ValueError):
    pass


def weight_cap(n: int) -> float:
    return float(max(n, 2)) ** WEIGHT_CAP_EXPONENT


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    simple_flag: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.int64)
        v = np.ascontiguousarray(self.v, dtype=np.int64)
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)
        if not (u.shape == v.shape == w.shape) or u.ndim != 1:
            raise GraphError("edge arrays must be 1-d and equally long")
        if self.n < 1:
            raise GraphError("graph needs at least one vertex")
        if len(u):
            if u.min() < 0 or v.min() < 0 or u.max() >= self.n or v.max() >= self.n:
                raise GraphError("vertex id out of range")
            if np.any(u == v):
                raise GraphError("self-loops are not allowed")
            if np.any(~(w > 0)):
                raise GraphError("weights must be strictly positive")
            if w.max() > weight_cap(self.n):
                raise GraphError(f"weight exceeds cap {weight_cap(self.n):g}")
        if self.simple_flag:
            if np.any(w != 1.0):
                raise GraphError("simple graphs carry unit weights only")
            if len(np.unique(self.pair_keys())) != len(u):
                raise GraphError("simple graph has a duplicate pair")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]], simple: bool = False) -> "WeightedGraph":
        rows = [tuple(e) for e in edges]
        u = [int(r[0]) for r in rows]
        v = [int(r[1]) for r in rows]
        w = [float(r[2]) if len(r) > 2 else 1.0 for r in rows]
        return cls(n, np.array(u, dtype=np.int64), np.array(v, dtype=np.int64),
                   np.array(w, dtype=np.float64), simple_flag=simple)

    @property
    def m(self) -> int:
        return len(self.u)

    @property
    def integral(self) -> bool:
        if "integral" not in self._cache:
            self._cache["integral"] = bool(np.all(self.w == np.round(self.w)))
        return self._cache["integral"]

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.w.tolist()))

    def pair_keys(self) -> np.ndarray:
        a = np.minimum(self.u, self.v)
        b = np.maximum(self.u, self.v)
        return a * self.n + b

    def degrees(self) -> np.ndarray:
        """Weighted degree of every vertex."""
        d = np.bincount(self.u, weights=self.w, minlength=self.n)
        d += np.bincount(self.v, weights=self.w, minlength=self.n)
        return d

    def laplacian(self) -> sp.csr_matrix:
        if "lap" not in self._cache:
            n = self.n
            rows = np.concatenate([self.u, self.v, np.arange(n)])
            cols = np.concatenate([self.v, self.u, np.arange(n)])
            vals = np.concatenate([-self.w, -self.w, self.degrees()])
            self._cache["lap"] = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return self._cache["lap"]

    def adjacency_index(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR-style (indptr, neighbor, edge id) arrays for O(deg) iteration."""
        if "adj" not in self._cache:
            ends = np.concatenate([self.u, self.v])
            other = np.concatenate([self.v, self.u])
            eid = np.concatenate([np.arange(self.m), np.arange(self.m)])
            order = np.argsort(ends, kind="stable")
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(ends, minlength=self.n), out=indptr[1:])
            self._cache["adj"] = (indptr, other[order], eid[order])
        return self._cache["adj"]

    def neighbors(self, x: int) -> np.ndarray:
        indptr, nbr, _ = self.adjacency_index()
        return nbr[indptr[x]:indptr[x + 1]]

    def components(self) -> np.ndarray:
        """Connected-component label per vertex."""
        if "comp" not in self._cache:
            from scipy.sparse.csgraph import connected_components

            adj = sp.csr_matrix((np.ones(self.m), (self.u, self.v)), shape=(self.n, self.n))
            _, labels = connected_components(adj, directed=False)
            self._cache["comp"] = labels
        return self._cache["comp"]

    def is_connected(self) -> bool:
        return self.n == 1 or int(self.components().max()) == 0

    def subgraph_edges(self, idx: np.ndarray, simple: bool = False) -> "WeightedGraph":
        return WeightedGraph(self.n, self.u[idx], self.v[idx], self.w[idx], simple_flag=simple)

    def with_weights(self, w: np.ndarray) -> "WeightedGraph":
        return WeightedGraph(self.n, self.u, self.v, w)

    def incidence(self) -> "IncidenceView":
        return IncidenceView(self)


def concat_graphs(n: int, parts: Sequence[WeightedGraph]) -> WeightedGraph:
    if not parts:
        return WeightedGraph(n, np.zeros(0), np.zeros(0), np.zeros(0))
    return WeightedGraph(n, np.concatenate([p.u for p in parts]),
                         np.concatenate([p.v for p in parts]),
                         np.concatenate([p.w for p in parts]))


@dataclass(frozen=True)
class Cut:
    """A vertex bipartition; ``side`` is a bitset (bit i set iff vertex i in S)."""

    n: int
    side: int
    value: float | None = None

    def __post_init__(self):
        full = (1 << self.n) - 1
        if not 0 < self.side < full:
            raise GraphError("cut side must be a proper nonempty vertex subset")

    @classmethod
    def from_vertices(cls, n: int, vertices: Iterable[int], value: float | None = None) -> "Cut":
        side = 0
        for x in vertices:
            side |= 1 << int(x)
        return cls(n, side, value)

    @classmethod
    def from_mask(cls, mask: np.ndarray, value: float | None = None) -> "Cut":
        return cls.from_vertices(len(mask), np.flatnonzero(mask), value)

    def vertices(self) -> list[int]:
        return [i for i in range(self.n) if self.side >> i & 1]

    def mask(self) -> np.ndarray:
        return bitset_to_mask(self.side, self.n)

    def canonical(self) -> "Cut":
        """Same bipartition with the side holding vertex 0."""
        if self.side & 1:
            return self
        return Cut(self.n, ((1 << self.n) - 1) ^ self.side, self.value)

    def key(self) -> int:
        return self.canonical().side

    def with_value(self, value: float) -> "Cut":
        return Cut(self.n, self.side, value)

    def crossing(self, g: WeightedGraph) -> np.ndarray:
        m = self.mask()
        return np.flatnonzero(m[g.u] != m[g.v])


def bitset_to_mask(side: int, n: int) -> np.ndarray:
    raw = side.to_bytes((n + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:n].astype(bool)


def mask_to_bitset(mask: np.ndarray) -> int:
    packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def cut_value(g: WeightedGraph, s: Cut | np.ndarray) -> float:
    mask = s.mask() if isinstance(s, Cut) else np.asarray(s, dtype=bool)
    if len(mask) != g.n:
        raise GraphError("cut dimension mismatch")
    if not mask.any() or mask.all():
        raise GraphError("cut side must be a proper nonempty subset")
    return float(g.w[mask[g.u] != mask[g.v]].sum())


def quadratic_form(g: WeightedGraph, x: np.ndarray) -> float:
    """x^T L x, computed edge-wise as sum w_e (x_u - x_v)^2."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise GraphError(f"expected vector of length {g.n}, got {x.shape}")
    d = x[g.u] - x[g.v]
    return float(np.dot(g.w, d * d))


def min_degree_cut(g: WeightedGraph) -> Cut:
    if g.n < 2:
        raise GraphError("need at least two vertices")
    deg = g.degrees()
    x = int(np.argmin(deg))  # argmin returns the lowest index on ties
    return Cut(g.n, 1 << x, float(deg[x]))


@dataclass(frozen=True)
class IncidenceView:
    """Rows b_e = sqrt(w_e) (1_u - 1_v) of the weighted incidence matrix."""

    graph: WeightedGraph

    def row(self, e: int) -> tuple[int, int, float]:
        g = self.graph
        return int(g.u[e]), int(g.v[e]), math.sqrt(g.w[e])

    def rows(self):
        g = self.graph
        s = np.sqrt(g.w)
        for e in range(g.m):
            yield int(g.u[e]), int(g.v[e]), float(s[e])

    def matrix(self) -> sp.csr_matrix:
        g = self.graph
        s = np.sqrt(g.w)
        r = np.concatenate([np.arange(g.m), np.arange(g.m)])
        c = np.concatenate([g.u, g.v])
        vals = np.concatenate([s, -s])
        return sp.csr_matrix((vals, (r, c)), shape=(g.m, g.n))


# -- text format: "n m" header then "u v [w]" lines, line order = arrival order

def parse_graph(text: str, simple: bool = False) -> WeightedGraph:
    lines = [ln.split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("#")]
    if not lines:
        raise GraphError("empty graph file")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for ln in body:
        if len(ln) not in (2, 3):
            raise GraphError(f"malformed edge line: {' '.join(ln)}")
        edges.append((int(ln[0]), int(ln[1]), float(ln[2]) if len(ln) == 3 else 1.0))
    return WeightedGraph.from_edges(n, edges, simple=simple)


def format_graph(g: WeightedGraph) -> str:
    out = io.StringIO()
    out.write(f"{g.n} {g.m}\n")
    unit = np.all(g.w == 1.0)
    for a, b, w in g.edges():
        if unit:
            out.write(f"{a} {b}\n")
        else:
            out.write(f"{a} {b} {w:.17g}\n")
    return out.getvalue()


def read_graph(path: str | Path, simple: bool = False) -> WeightedGraph:
    return parse_graph(Path(path).read_text(), simple=simple)


def write_graph(g: WeightedGraph, path: str | Path, meta: dict | None = None) -> None:
    path = Path(path)
    path.write_text(format_graph(g))
    if meta is not None:
        path.with_name(path.name + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def is_simple_unit(g: WeightedGraph) -> bool:
    return bool(np.all(g.w == 1.0)) and len(np.unique(g.pair_keys())) == g.m

"""Exact reference computations used to validate the randomized modules.

Nothing here calls into the sketching or sampling code.
"""
from __future__ import annotations

import math

import networkx as nx
import numpy as np

from .graph import Cut, GraphError, WeightedGraph

BRUTE_FORCE_MAX_N = 20
DENSE_MAX_N = 500


def _component_cut(g: WeightedGraph) -> Cut:
    labels = g.components()
    return Cut.from_mask(labels == labels[0], 0.0).canonical()


def to_networkx(g: WeightedGraph) -> nx.Graph:
    """Simple weighted nx.Graph; parallel edges are summed."""
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    for a, b, w in g.edges():
        if h.has_edge(a, b):
            h[a][b]["weight"] += w
        else:
            h.add_edge(a, b, weight=w)
    return h


def stoer_wagner_min_cut(g: WeightedGraph) -> tuple[float, Cut]:
    if g.n < 2:
        raise GraphError("need at least two vertices")
    if not g.is_connected():
        return 0.0, _component_cut(g)
    value, (a, _) = nx.stoer_wagner(to_networkx(g), weight="weight")
    return float(value), Cut.from_vertices(g.n, a, float(value)).canonical()


def all_cut_values(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Every bipartition with vertex n-1 outside S: (side bitsets, values)."""
    n = g.n
    if n > BRUTE_FORCE_MAX_N:
        raise GraphError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}")
    sides = np.arange(1, 1 << (n - 1), dtype=np.int64)
    vals = np.zeros(len(sides))
    for a, b, w in g.edges():
        vals += w * (((sides >> a) ^ (sides >> b)) & 1)
    return sides, vals


def brute_force_cut_family(g: WeightedGraph, alpha: float, rtol: float = 1e-9) -> dict[int, float]:
    """Canonical bitset (side containing vertex 0) -> value for every cut <= alpha * min."""
    sides, vals = all_cut_values(g)
    lim = alpha * vals.min() * (1 + rtol)
    full = (1 << g.n) - 1
    out = {}
    for s, v in zip(sides[vals <= lim].tolist(), vals[vals <= lim].tolist()):
        out[s if s & 1 else s ^ full] = v
    return out


def brute_force_min_cut(g: WeightedGraph) -> float:
    return float(all_cut_values(g)[1].min())


def laplacian_pinv(g: WeightedGraph) -> np.ndarray:
    if g.n > DENSE_MAX_N:
        raise GraphError(f"dense oracle limited to n <= {DENSE_MAX_N}")
    if not g.is_connected():
        raise GraphError("dense resistance oracle needs a connected graph")
    lap = g.laplacian().toarray()
    vals, vecs = np.linalg.eigh(lap)
    inv = np.zeros_like(vals)
    inv[1:] = 1.0 / vals[1:]  # the kernel is the single constant vector
    return (vecs * inv) @ vecs.T


def dense_er_matrix(g: WeightedGraph) -> np.ndarray:
    p = laplacian_pinv(g)
    d = np.diag(p)
    return d[:, None] + d[None, :] - 2 * p


def exact_leverage_scores(g: WeightedGraph) -> np.ndarray:
    r = dense_er_matrix(g)
    return g.w * r[g.u, g.v]


def foster_sum(g: WeightedGraph, r: np.ndarray) -> float:
    """sum_e w_e r(e); equals n - 1 on a connected graph."""
    return float(np.sum(g.w * r[g.u, g.v]))


def cut_family_size_bound(n: int, alpha: float) -> int:
    return n ** math.floor(2 * alpha)


EXHAUSTIVE_SCAN_MAX_N = 28


def cuts_below(g: WeightedGraph, limit: float, chunk: int = 1 << 20) -> dict[int, float]:
    """Every cut of value < limit, scanned exhaustively in chunks (canonical bitsets)."""
    n = g.n
    if n > EXHAUSTIVE_SCAN_MAX_N:
        raise GraphError(f"exhaustive scan limited to n <= {EXHAUSTIVE_SCAN_MAX_N}")
    full = (1 << n) - 1
    total = 1 << (n - 1)
    out = {}
    for lo in range(1, total, chunk):
        sides = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        vals = np.zeros(len(sides))
        for a, b, w in g.edges():
            vals += w * (((sides >> a) ^ (sides >> b)) & 1)
        hit = vals < limit
        for s, v in zip(sides[hit].tolist(), vals[hit].tolist()):
            out[s if s & 1 else s ^ full] = v
    return out

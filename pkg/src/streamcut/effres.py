"""Effective-resistance sketches built from a sparsifier.

Each copy stores Z = Q W^1/2 B L^+ (k x n); a pair query is the squared
distance between two columns, and copies are combined by the median.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, WeightedGraph
from .linalg import AMPLIFY_COPIES, C_JL, LaplacianSolver, jl_rows, rademacher_block
from .sparsify import Sparsifier


@dataclass
class ERSketch:
    n: int
    k: int
    tol: float
    Z: list[np.ndarray]  # one k x n matrix per copy

    @property
    def copies(self) -> int:
        return len(self.Z)

    def words(self) -> int:
        return sum(z.size for z in self.Z)


def _graph_of(h) -> WeightedGraph:
    return h.graph if isinstance(h, Sparsifier) else h


def _one_copy(g: WeightedGraph, k: int, seed: int, tol: float) -> np.ndarray:
    solver = LaplacianSolver(g, tol=tol)  # raises on a disconnected graph
    q = rademacher_block(seed, np.arange(g.m), k)
    y = g.incidence().matrix().T @ q.T  # n x k, column i is (Q W^1/2 B)_i
    z = solver.solve(np.asarray(y))
    return np.ascontiguousarray(z.T)


def build_er_sketch(h, eps: float, seed: int, copies: int = AMPLIFY_COPIES,
                    c_jl: float = C_JL, tol: float = 1e-10) -> ERSketch:
    """Sketch copies over one sparsifier, or one copy per sparsifier when given a list."""
    graphs = [_graph_of(x) for x in h] if isinstance(h, (list, tuple)) else [_graph_of(h)] * copies
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise GraphError("sparsifier copies disagree on n")
    k = jl_rows(n, eps, c_jl)
    Z = [_one_copy(g, k, seed * 1_000_003 + i, tol) for i, g in enumerate(graphs)]
    return ERSketch(n, k, tol, Z)


def _check_pair(sk: ERSketch, u: int, v: int) -> None:
    if not (0 <= u < sk.n and 0 <= v < sk.n):
        raise GraphError(f"vertex id out of range: ({u}, {v})")
    if u == v:
        raise GraphError("effective resistance query needs distinct endpoints")


def query_er(sk: ERSketch, u: int, v: int) -> float:
    _check_pair(sk, u, v)
    vals = [float(np.sum((z[:, u] - z[:, v]) ** 2)) for z in sk.Z]
    return float(np.median(vals))


def query_pairs(sk: ERSketch, us, vs) -> np.ndarray:
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    if len(us) and (us.min() < 0 or vs.min() < 0 or max(us.max(), vs.max()) >= sk.n):
        raise GraphError("vertex id out of range")
    if np.any(us == vs):
        raise GraphError("effective resistance query needs distinct endpoints")
    per = np.empty((sk.copies, len(us)))
    for i, z in enumerate(sk.Z):
        d = z[:, us] - z[:, vs]
        per[i] = np.einsum("ij,ij->j", d, d)
    return np.median(per, axis=0)


def all_pairs_er(sk: ERSketch) -> np.ndarray:
    """n x n matrix of median estimates (zero diagonal)."""
    per = []
    for z in sk.Z:
        sq = np.einsum("ij,ij->j", z, z)
        per.append(np.maximum(sq[:, None] + sq[None, :] - 2 * z.T @ z, 0.0))
    out = np.median(np.array(per), axis=0)
    np.fill_diagonal(out, 0.0)
    return out


def upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(n, 1)
    return iu[0], iu[1]


def relative_errors(est: np.ndarray, truth: np.ndarray) -> np.ndarray:
    return np.abs(est - truth) / np.where(truth > 0, truth, math.inf)

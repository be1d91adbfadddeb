"""Sketching and Laplacian linear algebra.

* counter-hashed Rademacher JL rows, so no projection matrix is ever stored;
* mergeable sketched incidence columns (``JLIncidenceSketch``);
* a Jacobi-preconditioned block conjugate-gradient Laplacian solver;
* JL-compressed effective-resistance embeddings built on the solver.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .graph import GraphError, WeightedGraph

C_JL = 4.0
AMPLIFY_COPIES = 9

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class DisconnectedGraphError(GraphError):
    def __init__(self, component: list[int]):
        super().__init__(f"graph is disconnected; separated component: {component[:20]}"
                         + (" ..." if len(component) > 20 else ""))
        self.component = component


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = x + _GOLD
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def rademacher_block(seed: int, edge_ids: np.ndarray, k: int) -> np.ndarray:
    """k x len(edge_ids) matrix of +-1/sqrt(k), a pure function of (seed, edge id, row)."""
    ids = np.asarray(edge_ids, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _splitmix64(ids * _GOLD ^ _splitmix64(np.array([seed], dtype=np.uint64)))
        blocks = (k + 63) // 64
        h = _splitmix64(base[None, :] + np.arange(1, blocks + 1, dtype=np.uint64)[:, None] * _M2)
    shifts = np.arange(64, dtype=np.uint64)
    bits = (h[:, None, :] >> shifts[None, :, None]) & np.uint64(1)
    bits = bits.reshape(blocks * 64, len(ids))[:k]
    return (bits.astype(np.float64) * 2.0 - 1.0) / math.sqrt(k)


def jl_rows(n_logical: int, eps: float, c_jl: float = C_JL) -> int:
    return max(1, math.ceil(c_jl * math.log(max(n_logical, 2)) / eps ** 2))


class JLIncidenceSketch:
    """Sketched incidence columns T·B, one column per (super)vertex."""

    def __init__(self, n: int, k: int, seed: int):
        self.n = n
        self.k = k
        self.seed = seed
        self.cols = np.zeros((k, n))
        self.live = np.ones(n, dtype=bool)
        self.edge_counter = 0
        self.mass = 0.0

    @classmethod
    def for_accuracy(cls, n: int, eps: float, seed: int, c_jl: float = C_JL) -> "JLIncidenceSketch":
        return cls(n, jl_rows(n, eps, c_jl), seed)

    def copy(self) -> "JLIncidenceSketch":
        sk = JLIncidenceSketch(self.n, self.k, self.seed)
        sk.cols = self.cols.copy()
        sk.live = self.live.copy()
        sk.edge_counter = self.edge_counter
        sk.mass = self.mass
        return sk

    def edge_vector(self, edge_id: int) -> np.ndarray:
        return rademacher_block(self.seed, np.array([edge_id]), self.k)[:, 0]

    def absorb_edge(self, u: int, v: int, w: float = 1.0, edge_id: int | None = None) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise GraphError("edge endpoint out of range")
        if edge_id is None:
            edge_id = self.edge_counter
        t = math.sqrt(w) * self.edge_vector(edge_id)
        self.cols[:, u] += t
        self.cols[:, v] -= t
        self.edge_counter += 1
        self.mass += math.sqrt(w)

    def absorb_graph(self, g: WeightedGraph, edge_ids: np.ndarray | None = None) -> None:
        """Absorb every edge of g at once; edge ids default to 0..m-1 offset by the counter."""
        if g.m == 0:
            return
        if edge_ids is None:
            edge_ids = np.arange(self.edge_counter, self.edge_counter + g.m)
        q = rademacher_block(self.seed, edge_ids, self.k)
        self.cols += (g.incidence().matrix().T @ q.T).T
        self.edge_counter += g.m
        self.mass += float(np.sqrt(g.w).sum())

    def merge_columns(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("cannot merge a column with itself")
        if not (self.live[a] and self.live[b]):
            raise ValueError("merging a retired column")
        self.cols[:, a] += self.cols[:, b]
        self.cols[:, b] = 0.0
        self.live[b] = False

    def live_columns(self) -> np.ndarray:
        return np.flatnonzero(self.live)

    def cut_estimate(self) -> float:
        live = self.live_columns()
        if len(live) != 2:
            raise ValueError(f"cut estimate needs exactly 2 live columns, have {len(live)}")
        c = self.cols[:, live[0]]
        return float(c @ c)

    def estimate(self, mask: np.ndarray) -> float:
        """||T B x_S||^2 for an indicator over the original columns."""
        y = self.cols @ np.asarray(mask, dtype=np.float64)
        return float(y @ y)

    def estimate_many(self, masks: np.ndarray) -> np.ndarray:
        y = self.cols @ np.asarray(masks, dtype=np.float64).T
        return np.einsum("ij,ij->j", y, y)


def median_of(values) -> float:
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 1 or len(vals) % 2 == 0:
        raise ValueError("median amplification needs an odd number of copies")
    return float(np.median(vals))


class LaplacianSolver:
    """Solves L x = b on the subspace orthogonal to constants (per component)."""

    def __init__(self, g: WeightedGraph, tol: float = 1e-8, max_iters: int | None = None,
                 allow_disconnected: bool = False):
        self.graph = g
        self.tol = tol
        self.max_iters = max_iters if max_iters is not None else 10 * max(g.n, 10)
        self.allow_disconnected = allow_disconnected
        self.L = g.laplacian()
        deg = g.degrees()
        self._dinv = np.where(deg > 0, 1.0 / np.where(deg > 0, deg, 1.0), 0.0)
        self.labels = g.components()
        self.n_components = int(self.labels.max()) + 1 if g.n else 0
        if self.n_components > 1 and not allow_disconnected:
            comp = self.labels
            other = int(comp[np.argmax(comp != comp[0])])
            raise DisconnectedGraphError(np.flatnonzero(comp == other).tolist())

    def project(self, b: np.ndarray) -> np.ndarray:
        """Subtract the per-component mean."""
        b = np.array(b, dtype=np.float64, copy=True)
        two_d = b.ndim == 2
        if not two_d:
            b = b[:, None]
        lab = self.labels
        counts = np.bincount(lab, minlength=self.n_components).astype(np.float64)
        for j in range(b.shape[1]):
            means = np.bincount(lab, weights=b[:, j], minlength=self.n_components) / counts
            b[:, j] -= means[lab]
        return b if two_d else b[:, 0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = self.project(b)
        one_d = b.ndim == 1
        B = b[:, None] if one_d else b
        X = self._block_pcg(B)
        X = self.project(X)
        return X[:, 0] if one_d else X

    def _block_pcg(self, B: np.ndarray) -> np.ndarray:
        L, dinv = self.L, self._dinv[:, None]
        X = np.zeros_like(B)
        bnorm = np.linalg.norm(B, axis=0)
        active = bnorm > 0
        if not active.any():
            return X
        R = B.copy()
        Z = dinv * R
        P = Z.copy()
        rz = np.einsum("ij,ij->j", R, Z)
        rel = np.zeros_like(bnorm)
        for _ in range(self.max_iters):
            AP = L @ P
            pap = np.einsum("ij,ij->j", P, AP)
            alpha = np.where(active & (pap > 0), rz / np.where(pap > 0, pap, 1.0), 0.0)
            X += P * alpha
            R -= AP * alpha
            rel = np.where(active, np.linalg.norm(R, axis=0) / np.where(active, bnorm, 1.0), 0.0)
            active &= rel > self.tol
            if not active.any():
                return X
            Z = dinv * R
            rz_new = np.einsum("ij,ij->j", R, Z)
            beta = np.where(rz > 0, rz_new / np.where(rz > 0, rz, 1.0), 0.0)
            P = Z + P * beta
            rz = rz_new
        # recompute true residual before giving up; drift can make the recursive one pessimistic
        true_rel = np.linalg.norm(B - L @ X, axis=0) / np.where(bnorm > 0, bnorm, 1.0)
        worst = float(true_rel.max())
        if worst > self.tol:
            raise SolverError(f"CG did not converge in {self.max_iters} iterations "
                              f"(relative residual {worst:.3e})", worst)
        return X


def solve_laplacian(solver: LaplacianSolver, b: np.ndarray) -> np.ndarray:
    return solver.solve(b)


def effective_resistance_exactish(solver: LaplacianSolver, u: int, v: int) -> float:
    if u == v:
        raise ValueError("effective resistance needs distinct endpoints")
    chi = np.zeros(solver.graph.n)
    chi[u], chi[v] = 1.0, -1.0
    if solver.labels[u] != solver.labels[v]:
        return math.inf
    x = solver.solve(chi)
    return float(x[u] - x[v])


def resistance_embedding(g: WeightedGraph, k: int, seed: int, tol: float = 1e-8,
                         allow_disconnected: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Z = Q W^1/2 B L^+ (k x n); ||Z(1_u - 1_v)||^2 approximates r(u, v).

    Returns (Z, component labels).
    """
    solver = LaplacianSolver(g, tol=tol, allow_disconnected=allow_disconnected)
    if g.m == 0:
        return np.zeros((k, g.n)), solver.labels
    q = rademacher_block(seed, np.arange(g.m), k)
    y = g.incidence().matrix().T @ q.T  # n x k
    z = solver.solve(np.asarray(y))
    return z.T.copy(), solver.labels


def pair_resistances(z: np.ndarray, labels: np.ndarray, us: np.ndarray, vs: np.ndarray,
                     disconnected_value: float = math.inf) -> np.ndarray:
    d = z[:, us] - z[:, vs]
    r = np.einsum("ij,ij->j", d, d)
    return np.where(labels[us] == labels[vs], r, disconnected_value)


def leverage_rows(n: int) -> int:
    """Rows for the constant-accuracy resistance estimates used by the samplers."""
    return max(16, math.ceil(16 * math.log(max(n, 2))))


def approx_leverage(g: WeightedGraph, seed: int, estimator: WeightedGraph | None = None) -> np.ndarray:
    """Constant-accuracy w_e * r_e for every edge of g, resistances read off ``estimator`` (default g).

    Edges whose endpoints are disconnected in the estimator get leverage 1.
    """
    est = g if estimator is None else estimator
    z, labels = resistance_embedding(est, leverage_rows(g.n), seed)
    r = pair_resistances(z, labels, g.u, g.v)
    return np.minimum(g.w * r, 1.0)

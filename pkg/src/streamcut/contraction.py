"""Recursive random contraction for enumerating approximate minimum cuts.

Two engines share one schedule: from N supernodes contract weight-random
edges down to ceil(N / 2^(1/(2 alpha))) + 1, branch twice, and at
N <= 2 ceil(2 alpha) enumerate every bipartition of the survivors.

``engine="numba"`` runs the whole tree in a compiled kernel and emits cuts as
packed uint64 words. ``engine="python"`` walks the same tree with an explicit
``ContractionState`` that also merges JL sketch columns, so leaf values can be
read off the sketch and the zero-sum column invariant can be checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .graph import Cut, GraphError, WeightedGraph
from .linalg import JLIncidenceSketch

VALUE_RTOL = 1e-9


def default_reps(n: int) -> int:
    return max(1, math.ceil(8 * math.log(max(n, 2)) ** 2))


def base_size(alpha: float) -> int:
    return 2 * math.ceil(2 * alpha)


# Below this many supernodes the remaining contraction subtree would evaluate
# about as many bipartitions as a full scan (each level only drops one
# supernode), so the scan is used instead; it returns a superset of the cuts.
EXHAUSTIVE_N = 11


def next_size(N: int, alpha: float) -> int:
    return min(N - 1, math.ceil(N / 2 ** (1 / (2 * alpha))) + 1)


# ------------------------------------------------------------ cut family

@dataclass
class CutFamily:
    n: int
    alpha: float
    cuts: dict[int, float] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def min_value(self) -> float:
        return min(self.cuts.values()) if self.cuts else math.inf

    def add(self, side: int, value: float) -> None:
        full = (1 << self.n) - 1
        if not side & 1:
            side ^= full
        old = self.cuts.get(side)
        if old is None or value < old:
            self.cuts[side] = value

    def filtered(self) -> "CutFamily":
        lim = self.alpha * self.min_value * (1 + VALUE_RTOL)
        keep = {s: v for s, v in self.cuts.items() if v <= lim}
        return CutFamily(self.n, self.alpha, keep, dict(self.stats))

    def size_bound(self) -> int:
        """O(n^floor(2 alpha)) count from the approximate-cut counting bound (constant 1)."""
        return self.n ** math.floor(2 * self.alpha)

    def as_cuts(self) -> list[Cut]:
        return sorted((Cut(self.n, s, v) for s, v in self.cuts.items()),
                      key=lambda c: (c.value, c.side))

    def argmin(self) -> Cut:
        return self.as_cuts()[0]

    def __len__(self) -> int:
        return len(self.cuts)

    def __contains__(self, side: int) -> bool:
        full = (1 << self.n) - 1
        return (side if side & 1 else side ^ full) in self.cuts


# ------------------------------------------------------------ numba kernel

@nb.njit(cache=True)
def _find(par, x):
    r = x
    while par[r] != r:
        r = par[r]
    while par[x] != r:
        nxt = par[x]
        par[x] = r
        x = nxt
    return r


@nb.njit(cache=True)
def _contract(eu, ev, ew, N, t):
    """Contract weight-random edges until t supernodes remain; merge parallel edges.

    Returns (map old supernode -> new supernode, edges, new count).
    """
    m = len(eu)
    cum = np.cumsum(ew)
    total = cum[m - 1]
    par = np.arange(N)
    left = N
    misses = 0
    while left > t:
        # weighted draw with replacement; self-loops are rejected, which is the
        # same law as contracting a weight-random edge of the current multigraph
        i = np.searchsorted(cum, np.random.random() * total, side="right")
        if i >= m:
            i = m - 1
        a = _find(par, eu[i])
        b = _find(par, ev[i])
        if a != b:
            par[b] = a
            left -= 1
            misses = 0
        else:
            misses += 1
            if misses > 64 * m:
                break
    rel = -np.ones(N, np.int64)
    k = 0
    for x in range(N):
        r = _find(par, x)
        if rel[r] < 0:
            rel[r] = k
            k += 1
    mp = np.empty(N, np.int64)
    for x in range(N):
        mp[x] = rel[par[x]]
    if k <= 64 or k * k <= 8 * m:
        dense = np.zeros((k, k))
        cnt = 0
        for i in range(m):
            a = mp[eu[i]]
            b = mp[ev[i]]
            if a != b:
                if a > b:
                    a, b = b, a
                if dense[a, b] == 0.0:
                    cnt += 1
                dense[a, b] += ew[i]
        nu = np.empty(cnt, np.int64)
        nv = np.empty(cnt, np.int64)
        nw = np.empty(cnt)
        q = 0
        for a in range(k):
            for b in range(a + 1, k):
                if dense[a, b] != 0.0:
                    nu[q] = a
                    nv[q] = b
                    nw[q] = dense[a, b]
                    q += 1
        return mp, nu, nv, nw, k
    pk = np.empty(m, np.int64)
    pw = np.empty(m)
    cnt = 0
    for i in range(m):
        a = mp[eu[i]]
        b = mp[ev[i]]
        if a != b:
            if a > b:
                a, b = b, a
            pk[cnt] = a * k + b
            pw[cnt] = ew[i]
            cnt += 1
    o = np.argsort(pk[:cnt])
    nu = np.empty(cnt, np.int64)
    nv = np.empty(cnt, np.int64)
    nw = np.empty(cnt)
    q = -1
    last = -1
    for j in range(cnt):
        key = pk[o[j]]
        if key != last:
            q += 1
            nu[q] = key // k
            nv[q] = key % k
            nw[q] = 0.0
            last = key
        nw[q] += pw[o[j]]
    return mp, nu[:q + 1], nv[:q + 1], nw[:q + 1], k


DENSE_N = 24  # below this many supernodes the kernel switches to a dense workspace


@nb.njit(cache=True)
def _dense_contract(W, deg, mp, N, t):
    """Contract W (N x N) in place down to t supernodes, one weight-random edge at a time.

    An edge is drawn by picking an endpoint proportionally to degree and then a
    neighbour proportionally to weight. ``mp`` maps incoming indices to final ones.
    """
    for x in range(N):
        mp[x] = x
    while N > t:
        total = 0.0
        for a in range(N):
            total += deg[a]
        if total <= 0.0:
            break
        r = np.random.random() * total
        pa = N - 1
        for a in range(N):
            r -= deg[a]
            if r < 0.0 and deg[a] > 0.0:
                pa = a
                break
        r = np.random.random() * deg[pa]
        pb = -1
        for b in range(N):
            if W[pa, b] > 0.0:
                pb = b
                r -= W[pa, b]
                if r < 0.0:
                    break
        if pb < pa:
            pa, pb = pb, pa
        deg[pa] += deg[pb] - 2.0 * W[pa, pb]
        for c in range(N):
            W[pa, c] += W[pb, c]
            W[c, pa] = W[pa, c]
        W[pa, pa] = 0.0
        last = N - 1
        if pb != last:
            for c in range(N):
                W[pb, c] = W[last, c]
                W[c, pb] = W[pb, c]
            W[pb, pb] = 0.0
            deg[pb] = deg[last]
        for x in range(len(mp)):
            if mp[x] == pb:
                mp[x] = pa
            elif mp[x] == last:
                mp[x] = pb
        N -= 1
    return N


@nb.njit(cache=True)
def _leaf_values(W, deg, N, out):
    """Values of all bipartitions {S, rest}, S over the first N-1 indices, in Gray-code order.

    out[i] holds the value of the subset with bitmask i ^ (i >> 1).
    """
    link = np.zeros(N)  # link[b] = weight from S to b
    sign = np.ones(N)
    val = 0.0
    low = np.inf
    for i in range(1, 1 << (N - 1)):
        a = 0
        while not (i >> a) & 1:
            a += 1
        # entering: val += deg - 2 link; leaving: val -= deg - 2 link
        val += sign[a] * (deg[a] - 2.0 * link[a])
        for b in range(N):
            link[b] += sign[a] * W[a, b]
        sign[a] = -sign[a]
        out[i] = val
        if val < low:
            low = val
    return low


@nb.njit(cache=True)
def _candidates(vals, count, thr, cand):
    k = 0
    for i in range(1, count):
        if vals[i] <= thr:
            cand[k] = i
            k += 1
    return k


@nb.njit(cache=True)
def _ks_kernel(n, eu, ev, ew, alpha, reps, seed, base, shrink, cap0, best0, exh):
    np.random.seed(seed)
    words = (n + 63) // 64
    out = np.zeros((cap0, words), np.uint64)
    vals = np.empty(cap0)
    n_out = 0
    best = best0
    leaves = 0
    # path[d] maps depth-(d-1) supernodes to depth-d supernodes on the current DFS path
    path = [np.arange(n)]
    D = DENSE_N + 2
    Wk = np.zeros((D, DENSE_N, DENSE_N))
    Mk = np.zeros((D, DENSE_N), np.int64)
    Dk = np.zeros((D, DENSE_N))
    top = max(base, exh)
    leafv = np.zeros(1 << (top - 1))
    cand = np.zeros(1 << (top - 1), np.int64)
    Nk = np.zeros(D, np.int64)
    stage = np.zeros(D, np.int64)
    lab = np.empty(n, np.int64)
    rootmap = np.zeros(DENSE_N, np.int64)
    seen = np.zeros(256, np.int64)
    for _ in range(reps):
        st_map = [np.arange(n)]
        st_u = [eu.copy()]
        st_v = [ev.copy()]
        st_w = [ew.copy()]
        st_n = [n]
        st_d = [0]
        while len(st_n) > 0:
            mp = st_map.pop()
            u = st_u.pop()
            v = st_v.pop()
            w = st_w.pop()
            N = st_n.pop()
            d = st_d.pop()
            if d < len(path):
                path[d] = mp
            else:
                path.append(mp)
            if N > DENSE_N and len(u) > 0:
                t = min(N - 1, int(math.ceil(N / shrink)) + 1)
                for _b in range(2):
                    nmp, nu, nv, nw, k = _contract(u, v, w, N, t)
                    st_map.append(nmp)
                    st_u.append(nu)
                    st_v.append(nv)
                    st_w.append(nw)
                    st_n.append(k)
                    st_d.append(d + 1)
                continue
            # dense subtree rooted here; level j lives in Wk[j], Mk[j] maps level j-1 -> j
            W0 = Wk[0]
            W0[:N, :N] = 0.0
            Dk[0, :N] = 0.0
            for i in range(len(u)):
                W0[u[i], v[i]] += w[i]
                W0[v[i], u[i]] += w[i]
                Dk[0, u[i]] += w[i]
                Dk[0, v[i]] += w[i]
            Nk[0] = N
            stage[0] = 0
            j = 0
            root_lab = False
            n_seen = 0
            while j >= 0:
                Nj = Nk[j]
                if Nj > top and stage[j] < 2:
                    stage[j] += 1
                    t = min(Nj - 1, int(math.ceil(Nj / shrink)) + 1)
                    Wk[j + 1, :Nj, :Nj] = Wk[j, :Nj, :Nj]
                    Dk[j + 1, :Nj] = Dk[j, :Nj]
                    Nk[j + 1] = _dense_contract(Wk[j + 1], Dk[j + 1], Mk[j + 1, :Nj], Nj, t)
                    stage[j + 1] = 0
                    j += 1
                    continue
                if Nj > top:
                    j -= 1
                    continue
                leaves += 1
                have_lab = False
                lmin = _leaf_values(Wk[j], Dk[j], Nj, leafv)
                if lmin < best:
                    best = lmin
                n_cand = _candidates(leafv, 1 << (Nj - 1), alpha * best * (1.0 + 1e-9), cand)
                for ci in range(n_cand):
                    i = cand[ci]
                    val = leafv[i]
                    s = i ^ (i >> 1)
                    if not have_lab:
                        # leaf index of every dense-root supernode
                        for r in range(N):
                            rootmap[r] = r
                        for jj in range(1, j + 1):
                            for r in range(N):
                                rootmap[r] = Mk[jj, rootmap[r]]
                        have_lab = True
                    rm = 0
                    for r in range(N):
                        if (s >> rootmap[r]) & 1:
                            rm |= 1 << r
                    if not rm & 1:
                        rm ^= (1 << N) - 1
                    dup = False
                    for q in range(n_seen):
                        if seen[q] == rm:
                            dup = True
                            break
                    if dup:
                        continue
                    if n_seen < len(seen):
                        seen[n_seen] = rm
                        n_seen += 1
                    if not root_lab:
                        for x in range(n):
                            lab[x] = x
                        for dd in range(1, d + 1):
                            pm = path[dd]
                            for x in range(n):
                                lab[x] = pm[lab[x]]
                        root_lab = True
                    if n_out == len(vals):
                        bigger = np.zeros((2 * len(vals), words), np.uint64)
                        bigger[:n_out] = out
                        out = bigger
                        bv = np.empty(2 * len(vals))
                        bv[:n_out] = vals
                        vals = bv
                    for x in range(n):
                        if (rm >> lab[x]) & 1:
                            out[n_out, x // 64] |= np.uint64(1) << np.uint64(x % 64)
                    vals[n_out] = val
                    n_out += 1
                j -= 1
    return out[:n_out], vals[:n_out], best, leaves


def _words_to_int(row: np.ndarray) -> int:
    return int.from_bytes(row.astype("<u8").tobytes(), "little")


def _check_connected(g: WeightedGraph) -> None:
    if g.n < 2:
        raise GraphError("need at least two vertices")
    if not g.is_connected():
        raise GraphError("contraction enumeration needs a connected graph")


def _singletons(g: WeightedGraph, fam: CutFamily) -> None:
    deg = g.degrees()
    for x in range(g.n):
        fam.add(1 << x, float(deg[x]))


def _enumerate_numba(g: WeightedGraph, alpha: float, reps: int, seed: int,
                     exhaustive_n: int) -> CutFamily:
    base = base_size(alpha)
    shrink = 2 ** (1 / (2 * alpha))
    seed = int(seed) % (2 ** 31 - 1)
    best0 = float(g.degrees().min())  # singletons are cuts, so this bounds the minimum
    rows, vals, best, leaves = _ks_kernel(g.n, g.u, g.v, g.w, float(alpha), int(reps),
                                          seed, base, shrink, 1024, best0, exhaustive_n)
    fam = CutFamily(g.n, alpha, stats={"leaves": int(leaves), "reps": reps, "engine": "numba"})
    for r, val in zip(rows, vals.tolist()):
        fam.add(_words_to_int(r), val)
    _singletons(g, fam)
    return fam


# ------------------------------------------------------------ python engine

class ContractionState:
    """Union-find partition + contracted multigraph + attached sketch columns.

    Supernodes are named by their union-find root; the live sketch columns
    are exactly the roots.
    """

    def __init__(self, g: WeightedGraph, sketch: JLIncidenceSketch | None = None):
        self.n = g.n
        self.parent = list(range(g.n))
        self.members = {x: [x] for x in range(g.n)}
        self.adj: dict[int, dict[int, float]] = {x: {} for x in range(g.n)}
        for a, b, w in g.edges():
            self.adj[a][b] = self.adj[a].get(b, 0.0) + w
            self.adj[b][a] = self.adj[b].get(a, 0.0) + w
        self.sketch = sketch

    def copy(self) -> "ContractionState":
        st = ContractionState.__new__(ContractionState)
        st.n = self.n
        st.parent = list(self.parent)
        st.members = {r: list(ms) for r, ms in self.members.items()}
        st.adj = {r: dict(nb_) for r, nb_ in self.adj.items()}
        st.sketch = None if self.sketch is None else self.sketch.copy()
        return st

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    @property
    def supernodes(self) -> list[int]:
        return sorted(self.members)

    def edges(self) -> list[tuple[int, int, float]]:
        return [(a, b, w) for a, nb_ in self.adj.items() for b, w in nb_.items() if a < b]

    def contract(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            raise GraphError("contracting a self-loop")
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.members[ra].extend(self.members.pop(rb))
        for x, w in self.adj.pop(rb).items():
            del self.adj[x][rb]
            if x == ra:
                continue
            self.adj[ra][x] = self.adj[ra].get(x, 0.0) + w
            self.adj[x][ra] = self.adj[x].get(ra, 0.0) + w
        if self.sketch is not None:
            self.sketch.merge_columns(ra, rb)
        return ra

    def contract_random_to(self, t: int, rng: np.random.Generator) -> None:
        while len(self.members) > t:
            es = self.edges()
            if not es:
                return
            w = np.array([e[2] for e in es])
            i = rng.choice(len(es), p=w / w.sum())
            self.contract(es[i][0], es[i][1])

    def side_value(self, roots: list[int]) -> float:
        s = set(roots)
        return sum(w for a in s for b, w in self.adj[a].items() if b not in s)

    def side_bitset(self, roots: list[int]) -> int:
        side = 0
        for r in roots:
            for x in self.members[r]:
                side |= 1 << x
        return side

    def column_sum(self, roots: list[int]) -> np.ndarray:
        return self.sketch.cols[:, roots].sum(axis=1)


def _enumerate_python(g, alpha, reps, seed, sketch, exhaustive_n, exact_check=True) -> CutFamily:
    rng = np.random.default_rng([seed, 0xC0A7])
    base = max(base_size(alpha), exhaustive_n)
    fam = CutFamily(g.n, alpha, stats={"leaves": 0, "reps": reps, "engine": "python",
                                       "negation_violation": 0.0, "leaf_mismatch": 0.0})

    def leaf(st: ContractionState) -> None:
        fam.stats["leaves"] += 1
        roots = st.supernodes
        N = len(roots)
        for s in range(1, 1 << (N - 1)):
            side = [roots[i] for i in range(N) if s >> i & 1]
            other = [roots[i] for i in range(N) if not s >> i & 1]
            exact = st.side_value(side)
            bits = st.side_bitset(side)
            if exact_check:
                from .graph import cut_value
                truth = cut_value(g, Cut(g.n, bits))
                fam.stats["leaf_mismatch"] = max(fam.stats["leaf_mismatch"], abs(truth - exact))
            if st.sketch is not None:
                a, b = st.column_sum(side), st.column_sum(other)
                scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
                fam.stats["negation_violation"] = max(fam.stats["negation_violation"],
                                                      float(np.linalg.norm(a + b) / scale))
                val = float(a @ a)
            else:
                val = exact
            fam.add(bits, val)

    for _ in range(reps):
        root = ContractionState(g, sketch.copy() if sketch is not None else None)
        stack = [root]
        while stack:
            st = stack.pop()
            N = len(st.members)
            if N <= base:
                leaf(st)
                continue
            t = next_size(N, alpha)
            for _b in range(2):
                child = st.copy()
                child.contract_random_to(t, rng)
                stack.append(child)
    if sketch is None:
        _singletons(g, fam)
    return fam


def enumerate_approx_min_cuts(g: WeightedGraph, alpha: float, reps: int | None = None,
                              seed: int = 0, sketch: JLIncidenceSketch | None = None,
                              engine: str = "numba", exhaustive_n: int = EXHAUSTIVE_N) -> CutFamily:
    """All cuts of value <= alpha * min (with high probability), as a deduplicated family.

    With ``sketch`` attached the python engine evaluates leaves on the merged
    sketch columns; the numba engine always evaluates exactly.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not 1 <= exhaustive_n <= DENSE_N:
        raise ValueError(f"exhaustive_n must lie in [1, {DENSE_N}]")
    _check_connected(g)
    reps = default_reps(g.n) if reps is None else reps
    if engine == "numba" and sketch is None:
        fam = _enumerate_numba(g, alpha, reps, seed, exhaustive_n)
    elif engine in ("numba", "python"):
        fam = _enumerate_python(g, alpha, reps, seed, sketch, exhaustive_n)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return fam.filtered()


def evaluate_with_sketches(fam: CutFamily, sketches: list[JLIncidenceSketch]) -> CutFamily:
    """Re-score every family member by the median of sketch estimates and refilter."""
    if not fam.cuts:
        return fam
    from .graph import bitset_to_mask
    sides = list(fam.cuts)
    masks = np.array([bitset_to_mask(s, fam.n) for s in sides], dtype=np.float64)
    est = np.array([sk.estimate_many(masks) for sk in sketches])
    med = np.median(est, axis=0)
    out = CutFamily(fam.n, fam.alpha, dict(zip(sides, med.tolist())), dict(fam.stats))
    out.stats["exact_values"] = dict(fam.cuts)
    return out.filtered()

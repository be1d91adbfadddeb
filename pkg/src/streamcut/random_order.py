"""Exact minimum cut of a simple unweighted graph from one random-order pass.

Phase 1 sparsifies a growing prefix and checks, at every power-of-two edge
count, whether the prefix's minimum cut already exceeds c_thresh * ln n. If it
does, the prefix sparsifier is frozen and its non-singleton near-minimum cuts
become a fixed candidate family. Phase 2 keeps only the suffix edges that
cross some candidate, plus exact degrees, which is enough to recover every
minimum cut and its edge set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contraction import EXHAUSTIVE_N, enumerate_approx_min_cuts
from .graph import Cut, GraphError, WeightedGraph, bitset_to_mask
from .stream import EdgeStream, SpaceMeter, StreamConfig, StreamingSparsifier
from .sparsify import Kind

FAMILY_RADIUS = 1.21  # 1.1^2: room for the prefix estimation error


@dataclass
class RandomOrderConfig:
    c_thresh: float = 20.0
    oversample: float = 4.0
    radius: float = FAMILY_RADIUS
    reps: int | None = None
    c_edge: float = 8.0
    exhaustive_n: int = EXHAUSTIVE_N
    stream: StreamConfig | None = None


@dataclass
class RandomOrderResult:
    value: int
    cuts: list[Cut]
    crossing: dict[int, list[int]]  # canonical side -> stream edge ids
    meta: dict = field(default_factory=dict)

    def to_json(self, edges=None) -> dict:
        def fmt(ids):
            return ids if edges is None else [list(edges[i][:2]) for i in ids]
        return {
            "value": self.value,
            "cuts": [{"side": c.vertices(), "crossing_edges": fmt(self.crossing[c.key()])}
                     for c in self.cuts],
            "T_size": self.meta.get("T_size", 0),
            "space_words_peak": self.meta.get("space_words_peak", 0),
            "froze_at": self.meta.get("froze_at"),
        }


def _ln(n: int) -> float:
    return max(1.0, math.log(n))


def check_simple_stream(stream: EdgeStream) -> None:
    """Input validation before the pass: unit weights and no repeated pair."""
    seen = set()
    for u, v, w in stream._edges:
        if w != 1.0:
            raise GraphError("random-order exact min cut needs unit weights")
        key = (min(u, v), max(u, v))
        if u == v or key in seen:
            raise GraphError(f"input is not simple: repeated pair {key}")
        seen.add(key)


class _Prefix:
    """Raw kept prefix edges, stored alongside the sparsifier for edge recovery."""

    def __init__(self):
        self.u, self.v, self.ids = [], [], []

    def add(self, u, v, eid):
        self.u.append(u)
        self.v.append(v)
        self.ids.append(eid)

    def crossing(self, mask: np.ndarray) -> list[int]:
        if not self.ids:
            return []
        u, v = np.array(self.u), np.array(self.v)
        return [int(i) for i in np.array(self.ids)[mask[u] != mask[v]]]

    def __len__(self):
        return len(self.ids)


def _min_cut_family(h: WeightedGraph, alpha: float, reps, seed, exhaustive_n):
    """Family of cuts within alpha of the minimum of h; disconnected h gives value 0."""
    if not h.is_connected():
        return None
    return enumerate_approx_min_cuts(h, alpha, reps, seed, exhaustive_n=exhaustive_n)


def exact_min_cut_random_order(stream: EdgeStream, seed: int,
                               config: RandomOrderConfig | None = None,
                               meter: SpaceMeter | None = None) -> RandomOrderResult:
    cfg = config or RandomOrderConfig()
    check_simple_stream(stream)
    n = stream.n
    meter = meter if meter is not None else SpaceMeter()
    eps1 = 1.0 / _ln(n) ** 2
    threshold = cfg.c_thresh * _ln(n)
    scfg = cfg.stream or StreamConfig()
    scfg = StreamConfig(**{**scfg.__dict__, "oversample": cfg.oversample})
    alg1 = StreamingSparsifier(n, eps1, seed, Kind.FOR_ALL, scfg, meter, "alg1")
    deg = np.zeros(n, dtype=np.int64)
    meter.set("degrees", n)
    prefix = _Prefix()
    checkpoints = []
    frozen = None
    next_check = 1
    count = 0
    it = iter(stream)

    # phase 1
    for eid, u, v, w in it:
        meter.tick()
        count += 1
        deg[u] += 1
        deg[v] += 1
        kept, _ = alg1.push(eid, u, v, w)
        if kept:
            prefix.add(u, v, eid)
            meter.set("prefix_store", 3 * len(prefix))
        if count == next_check:
            next_check *= 2
            h1 = alg1.snapshot()
            degs = h1.degrees()
            if degs.min() <= threshold or not h1.is_connected():
                # min cut <= min degree, so the prefix cannot clear the threshold yet
                checkpoints.append((count, None))
                continue
            fam = _min_cut_family(h1, 1.0, cfg.reps, seed + count, cfg.exhaustive_n)
            val = fam.min_value
            checkpoints.append((count, val))
            if val > threshold:
                frozen = h1
                break

    meta = {"eps1": eps1, "threshold": threshold, "checkpoints": checkpoints,
            "froze_at": count if frozen is not None else None}
    if frozen is None:
        return _finish_unfrozen(alg1, deg, prefix, n, eps1, cfg, seed, meter, meta)
    return _phase2(it, frozen, alg1, deg, prefix, n, eps1, cfg, seed, meter, meta, count)


def _sampled(alg1: StreamingSparsifier, h1: WeightedGraph) -> bool:
    """False when H1 is still the exact prefix, so rounding is trivially valid."""
    return h1.m != alg1.sampler.seen or bool(np.any(h1.w != 1.0))


def _check_rounding(value: float, eps1: float, sampled: bool) -> None:
    if sampled and eps1 * value >= 0.5:
        raise ArithmeticError(f"rounding invalid: eps1 * value = {eps1 * value:.3f} >= 1/2")


def _finish_unfrozen(alg1, deg, prefix, n, eps1, cfg, seed, meter, meta) -> RandomOrderResult:
    h1 = alg1.snapshot()
    meta.update({"phase": 1, "T_size": 0, "stream_edges": int(deg.sum() // 2)})
    if not h1.is_connected():
        labels = h1.components()
        cut = Cut.from_mask(labels == labels[0], 0.0).canonical()
        meta["space_words_peak"] = meter.peak
        return RandomOrderResult(0, [cut], {cut.key(): []}, meta)
    fam = _min_cut_family(h1, 1.0, cfg.reps, seed, cfg.exhaustive_n)
    sampled = _sampled(alg1, h1)
    rounded = {}
    for side, val in fam.cuts.items():
        _check_rounding(val, eps1, sampled)
        rounded[side] = int(round(val))
    full = (1 << n) - 1
    for x in range(n):
        side = 1 << x
        rounded.setdefault(side if side & 1 else side ^ full, int(deg[x]))
    best = min(min(rounded.values()), int(deg.min()))
    cuts, crossing = [], {}
    for side, val in sorted(rounded.items()):
        if val == best:
            c = Cut(n, side, float(val))
            cuts.append(c)
            crossing[side] = sorted(prefix.crossing(c.mask()))
    meta.update({"family_size": len(fam), "space_words_peak": meter.peak})
    return RandomOrderResult(best, cuts, crossing, meta)


def _phase2(it, h1, alg1, deg, prefix, n, eps1, cfg, seed, meter, meta, count) -> RandomOrderResult:
    fam = enumerate_approx_min_cuts(h1, cfg.radius, cfg.reps, seed + 1, exhaustive_n=cfg.exhaustive_n)
    sides = [s for s in fam.cuts if bin(s).count("1") not in (1, n - 1)]
    masks = np.array([bitset_to_mask(s, n) for s in sides], dtype=bool).reshape(len(sides), n)
    counters = np.zeros(len(sides), dtype=np.int64)
    meter.set("family", len(sides) * ((n + 63) // 64 + 1))
    T_u, T_v, T_id = [], [], []
    batch_u, batch_v, batch_id = [], [], []

    def flush():
        if not batch_u:
            return
        bu, bv = np.array(batch_u), np.array(batch_v)
        cross = masks[:, bu] != masks[:, bv]  # family x batch
        counters[:] += cross.sum(axis=1)
        hit = cross.any(axis=0)
        T_u.extend(bu[hit].tolist())
        T_v.extend(bv[hit].tolist())
        T_id.extend(np.array(batch_id)[hit].tolist())
        batch_u.clear()
        batch_v.clear()
        batch_id.clear()
        meter.set("T", 3 * len(T_id))

    suffix = 0
    for eid, u, v, w in it:
        meter.tick()
        suffix += 1
        deg[u] += 1
        deg[v] += 1
        batch_u.append(u)
        batch_v.append(v)
        batch_id.append(eid)
        meter.set("batch", 3 * len(batch_u))
        if len(batch_u) >= n:
            flush()
    flush()
    meter.set("batch", 0)

    sampled = _sampled(alg1, h1)
    values = {}
    for i, side in enumerate(sides):
        w_h1 = fam.cuts[side]
        _check_rounding(w_h1, eps1, sampled)
        values[side] = int(round(w_h1)) + int(counters[i])
    full = (1 << n) - 1
    best = int(deg.min())
    if values:
        best = min(best, min(values.values()))
    cuts, crossing, partial = [], {}, 0
    tu, tv, tid = np.array(T_u, dtype=np.int64), np.array(T_v, dtype=np.int64), np.array(T_id)
    for x in np.flatnonzero(deg == best).tolist():
        side = 1 << x
        values.setdefault(side if side & 1 else side ^ full, best)
    for side, val in sorted(values.items()):
        if val != best:
            continue
        c = Cut(n, side, float(val))
        mask = c.mask()
        edges = prefix.crossing(mask)
        if len(tid):
            edges += [int(i) for i in tid[mask[tu] != mask[tv]]]
        if bin(side).count("1") in (1, n - 1):
            partial += 1  # suffix edges at a lone vertex are only seen if they land in T
        cuts.append(c)
        crossing[side] = sorted(edges)
    meta.update({"phase": 2, "T_size": len(T_id), "T_bound": cfg.c_edge * n,
                 "T_within_bound": len(T_id) <= cfg.c_edge * n, "family_size": len(sides),
                 "suffix_edges": suffix, "singleton_edges_partial": partial, "stream_edges": int(deg.sum() // 2),
                 "space_words_peak": meter.peak})
    return RandomOrderResult(best, cuts, crossing, meta)


# ------------------------------------------------------------ concentration probe

def prefix_concentration_probe(g: WeightedGraph, ells=(10, 20, 40), trials: int = 10_000,
                               seed: int = 0, cuts: list[Cut] | None = None,
                               tol: float = 0.1) -> list[dict]:
    """Empirical rate of |w_H(S) - ell| > tol * ell for random-order prefixes H.

    The prefix holds round(m * ell / w_G(S)) edges, capped at m. Rates are
    averaged over the given cuts (default: every singleton).
    """
    if cuts is None:
        deg = g.degrees()
        cuts = [Cut(g.n, 1 << x, float(deg[x])) for x in range(g.n)]
    m = g.m
    rng = np.random.default_rng([seed, 0x9E0])
    cross = np.array([c.mask()[g.u] != c.mask()[g.v] for c in cuts])  # cuts x m
    wts = cross @ g.w
    rows = []
    sizes = {ell: np.minimum(m, np.round(m * ell / wts).astype(np.int64)) for ell in ells}
    fails = {ell: 0 for ell in ells}
    devs = {ell: 0.0 for ell in ells}
    wx = cross * g.w
    for _ in range(trials):
        order = rng.permutation(m)
        csum = np.cumsum(wx[:, order], axis=1)
        for ell in ells:
            h = sizes[ell]
            got = np.where(h > 0, csum[np.arange(len(cuts)), np.maximum(h - 1, 0)], 0.0)
            dev = np.abs(got - ell)
            fails[ell] += int(np.sum(dev > tol * ell))
            devs[ell] += float(dev.sum())
    for ell in ells:
        total = trials * len(cuts)
        rows.append({"ell": ell, "prefix_edges": sizes[ell].tolist(),
                     "capped": bool(np.any(m * ell / wts > m)),
                     "failure_rate": fails[ell] / total,
                     "mean_deviation": devs[ell] / total, "trials": trials,
                     "cuts": len(cuts)})
    return rows

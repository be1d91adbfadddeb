"""Command-line entry point: `streamcut <subcommand> ...`.

Exit status is 0 when every check the command performs passes, 1 when a
check fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from . import generators as gen
from .effres import all_pairs_er, build_er_sketch, query_pairs, upper_pairs
from .graph import GraphError, read_graph, write_graph
from .mincut import MinCutConfig, approx_min_cut_stream
from .oracles import brute_force_cut_family, dense_er_matrix, exact_leverage_scores, stoer_wagner_min_cut
from .random_order import RandomOrderConfig, exact_min_cut_random_order
from .stream import EdgeStream, SpaceMeter, stream_foreach_sparsifier, stream_forall_sparsifier


def _emit(args, payload: dict, text: str | None = None) -> None:
    if args.json or text is None:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(text)


def _stream(args, simple: bool = False):
    g = read_graph(args.graph, simple=simple)
    return g, EdgeStream.from_graph(g, shuffle=args.shuffle)


def _finish_meter(args, meter: SpaceMeter) -> None:
    if args.space_log:
        meter.write_csv(args.space_log)


# ------------------------------------------------------------------ commands

def cmd_sparsify(args) -> int:
    g, stream = _stream(args)
    meter = SpaceMeter()
    run = stream_foreach_sparsifier if args.kind == "foreach" else stream_forall_sparsifier
    h = run(stream, args.eps, args.seed, meter=meter)
    _finish_meter(args, meter)
    if args.out:
        h.save(args.out)
    factor = h.meta.get("tower_factor", 1.0)
    subset = bool(np.all((h.source_edge_ids >= 0) & (h.source_edge_ids < g.m)))
    ok = factor <= 1 + args.eps + 1e-12 and subset and bool(np.all(stream.visits == 1))
    payload = {"n": g.n, "m_in": g.m, "m_out": h.graph.m, "kind": h.kind.value, "eps": args.eps,
               "space_words_peak": meter.peak, "tower_factor": factor, "fallback": h.fallback,
               "checks_passed": ok}
    _emit(args, payload, f"{h.kind.value} sparsifier: {g.m} -> {h.graph.m} edges, "
                         f"peak {meter.peak} words, tower factor {factor:.4f}")
    return 0 if ok else 1


def cmd_mincut(args) -> int:
    _, stream = _stream(args)
    meter = SpaceMeter()
    cfg = MinCutConfig(alpha_c=args.alpha_c, reps=args.reps, coarse=args.coarse)
    res = approx_min_cut_stream(stream, args.eps, args.seed, cfg, meter)
    _finish_meter(args, meter)
    _emit(args, res.to_json(), f"min cut ~ {res.value:.4f}, side of {len(res.cut.vertices())} vertices, "
                               f"family {res.meta.get('family_size')}")
    return 0


def cmd_mincut_random_order(args) -> int:
    _, stream = _stream(args, simple=True)
    meter = SpaceMeter()
    cfg = RandomOrderConfig(c_thresh=args.c_thresh)
    try:
        res = exact_min_cut_random_order(stream, args.seed, cfg, meter)
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _finish_meter(args, meter)
    ok = res.meta.get("T_size", 0) <= cfg.c_edge * stream.n
    _emit(args, res.to_json(), f"min cut = {res.value}, {len(res.cuts)} minimum cuts, "
                               f"|T| = {res.meta.get('T_size', 0)}, froze at {res.meta.get('froze_at')}")
    return 0 if ok else 1


def _read_pairs(path) -> tuple[np.ndarray, np.ndarray]:
    rows = [ln.split() for ln in Path(path).read_text().splitlines()]
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if any(len(r) != 2 for r in rows):
        raise GraphError("pairs file lines must be 'u v'")
    arr = np.array(rows, dtype=np.int64).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def _write_csv(header, rows, out=None) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out:
            fh.close()


def cmd_effres(args) -> int:
    g, stream = _stream(args)
    meter = SpaceMeter()
    h = stream_foreach_sparsifier(stream, args.eps, args.seed, meter=meter)
    sk = build_er_sketch(h, args.eps, args.seed)
    meter.set("er_sketch", sk.words())
    _finish_meter(args, meter)
    if args.pairs:
        us, vs = _read_pairs(args.pairs)
        est = query_pairs(sk, us, vs)
    else:
        us, vs = upper_pairs(g.n)
        est = all_pairs_er(sk)[us, vs]
    _write_csv(["u", "v", "estimate"], [(int(a), int(b), f"{e:.12g}") for a, b, e in zip(us, vs, est)],
               args.out)
    return 0


def cmd_oracle(args) -> int:
    g = read_graph(args.graph)
    if args.what == "mincut":
        value, cut = stoer_wagner_min_cut(g)
        _emit(args, {"value": value, "side": cut.vertices()}, f"min cut = {value}")
    elif args.what == "cut-family":
        fam = brute_force_cut_family(g, args.alpha)
        cuts = [{"side": [x for x in range(g.n) if s >> x & 1], "value": v} for s, v in sorted(fam.items())]
        _emit(args, {"alpha": args.alpha, "cuts": cuts})
    elif args.what == "effres":
        r = dense_er_matrix(g)
        us, vs = upper_pairs(g.n)
        _write_csv(["u", "v", "resistance"], [(int(a), int(b), f"{r[a, b]:.12g}") for a, b in zip(us, vs)],
                   args.out)
    else:
        lev = exact_leverage_scores(g)
        _write_csv(["edge", "u", "v", "leverage"],
                   [(i, int(a), int(b), f"{x:.12g}") for i, (a, b, x) in enumerate(zip(g.u, g.v, lev))],
                   args.out)
    return 0


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, _, val = item.partition("=")
        if not _:
            raise GraphError(f"expected key=value, got {item!r}")
        if key == "bits":  # keep leading zeros
            out[key] = val
            continue
        try:
            out[key.replace("-", "_")] = json.loads(val)
        except json.JSONDecodeError:
            out[key.replace("-", "_")] = val
    return out


def cmd_gen(args) -> int:
    params = _parse_params(args.param)
    rng = np.random.default_rng(args.seed)
    if args.kind == "corpus":
        which = params.get("which", "mincut")
        entries = gen.mincut_corpus() if which == "mincut" else gen.structure_corpus()
        path = gen.gen_corpus(entries, args.out or "corpus")
        _emit(args, {"manifest": str(path), "graphs": len(entries)}, f"wrote {len(entries)} graphs, {path}")
        return 0
    if args.kind in ("hard-exact", "hard-approx"):
        if args.kind == "hard-exact":
            n = int(params.get("n", 6))
            nbits = n * (n - 1) // 2
            build = lambda b, i: gen.gen_hard_exact(n, b, i, args.seed)  # noqa: E731
            extra = {}
        else:
            e = gen.admissible_eps(float(params.get("eps", 1 / 12)))
            blocks = int(params.get("blocks", 2))
            nbits = gen.approx_bits_length(e, blocks)
            build = lambda b, i: gen.gen_hard_approx(e, b, i, args.seed, blocks)  # noqa: E731
            extra = {"eps_requested": params.get("eps", 1 / 12), "eps_used": str(e)}
        if "bits" in params:
            bits = np.array([int(c) for c in str(params["bits"])], dtype=np.int64)
            inst = build(bits, int(params.get("index", 0)))
        else:
            bits, _, inst = gen.random_gadget_draw(rng, nbits, build)
        truth = {**inst.truth, **extra, "bits": "".join(map(str, bits.tolist())), "alice_edges": inst.split}
        out = args.out or f"{args.kind}.txt"
        write_graph(inst.graph, out, truth)
        _emit(args, truth, f"wrote {out} (min cut {truth['min_cut']}, bit {truth['bit']})")
        return 0
    g = gen.generate(args.kind, params, args.seed)
    out = args.out or f"{args.kind}.txt"
    write_graph(g, out, {"kind": args.kind, "params": params, "seed": args.seed, "sha256_16": gen.graph_digest(g)})
    _emit(args, {"file": out, "n": g.n, "m": g.m, "sha256_16": gen.graph_digest(g)}, f"wrote {out}: n={g.n} m={g.m}")
    return 0


def cmd_accept(args) -> int:
    ids = [x.strip() for x in args.only.split(",")] if args.only else None
    results = acceptance.run(ids, quick=args.quick, echo=None if args.json else print)
    if args.json:
        print(json.dumps([{"criterion": r.cid, "title": r.title, "passed": r.passed, "summary": r.summary,
                           "seconds": round(r.seconds, 1)} for r in results], indent=2))
    else:
        passed = sum(r.passed for r in results)
        print(f"{passed}/{len(results)} criteria passed")
    return 0 if all(r.passed for r in results) else 1


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    def flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands must not reset values already given before the subcommand name
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        f = argparse.ArgumentParser(add_help=False)
        f.add_argument("--seed", type=int, default=d(0))
        f.add_argument("--shuffle", type=int, default=d(None), help="permute stream order with this seed")
        f.add_argument("--space-log", default=d(None), help="CSV path for the space meter time series")
        f.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
        return f

    common = flags(True)
    p = argparse.ArgumentParser(prog="streamcut", parents=[flags(False)],
                                description="Single-pass graph sparsification, min cut and resistance tools.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sparsify", parents=[common], help="stream a graph into a sparsifier")
    s.add_argument("graph")
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--kind", choices=["foreach", "forall"], default="foreach")
    s.add_argument("--out", default=None, help="write the sparsifier graph (plus .json metadata)")
    s.set_defaults(func=cmd_sparsify)

    s = sub.add_parser("mincut", parents=[common], help="(1+eps)-approximate global min cut")
    s.add_argument("graph")
    s.add_argument("--eps", type=float, default=0.2)
    s.add_argument("--alpha-c", type=float, default=1.0)
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--coarse", action="store_true", help="constant-accuracy candidate generation")
    s.set_defaults(func=cmd_mincut)

    s = sub.add_parser("mincut-random-order", parents=[common], help="exact min cut of a random-order stream")
    s.add_argument("graph")
    s.add_argument("--c-thresh", type=float, default=20.0)
    s.set_defaults(func=cmd_mincut_random_order)

    s = sub.add_parser("effres", parents=[common], help="effective resistances from a streamed sketch")
    s.add_argument("graph")
    s.add_argument("--eps", type=float, default=0.3)
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--pairs", default=None, help="file with 'u v' lines")
    grp.add_argument("--all", action="store_true", help="all pairs (the default)")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_effres)

    s = sub.add_parser("oracle", parents=[common], help="exact reference answers")
    s.add_argument("what", choices=["mincut", "cut-family", "effres", "leverage"])
    s.add_argument("graph")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("gen", parents=[common], help="generate instances")
    s.add_argument("kind", choices=sorted(gen.GENERATORS) + ["corpus", "hard-exact", "hard-approx"])
    s.add_argument("-p", "--param", action="append", help="key=value (repeatable)")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", default=None, help="comma-separated criterion ids")
    s.add_argument("--quick", action="store_true", help="shrunken experiments (smoke test only)")
    s.set_defaults(func=cmd_accept)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

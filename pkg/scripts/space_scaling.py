#!/usr/bin/env python3
"""Peak space of the for-each sparsifier against n, as CSV on stdout.

Average degree is held near 40. Pass --stressed to shrink the sampling
constants so that sampling actually kicks in at these sizes.
"""
import argparse

from streamcut.acceptance import STRESSED
from streamcut.generators import gnp
from streamcut.stream import EdgeStream, SpaceMeter, StreamConfig, stream_foreach_sparsifier

ap = argparse.ArgumentParser()
ap.add_argument("--ns", default="100,200,400,800")
ap.add_argument("--eps", default="0.5,0.25")
ap.add_argument("--stressed", action="store_true")
ap.add_argument("--seed", type=int, default=1)
args = ap.parse_args()
cfg = STRESSED if args.stressed else StreamConfig()
print("n,m,eps,peak_words,kept_edges")
for eps in map(float, args.eps.split(",")):
    for n in map(int, args.ns.split(",")):
        g = gnp(n, min(1.0, 40 / (n - 1)), n)
        meter = SpaceMeter()
        h = stream_foreach_sparsifier(EdgeStream.from_graph(g, shuffle=args.seed), eps, args.seed, cfg, meter)
        kept = getattr(h, "graph", h).m
        print(f"{n},{g.m},{eps},{meter.peak},{kept}", flush=True)

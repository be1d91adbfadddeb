#!/usr/bin/env python3
"""Write the min-cut corpus and the small structure corpus to disk with a manifest."""
import argparse

from streamcut.generators import gen_corpus, mincut_corpus, structure_corpus

ap = argparse.ArgumentParser()
ap.add_argument("outdir")
ap.add_argument("--size", type=int, default=50)
ap.add_argument("--structure", action="store_true", help="the small structure corpus instead")
args = ap.parse_args()
entries = structure_corpus() if args.structure else mincut_corpus(args.size)
print(gen_corpus(entries, args.outdir))

#!/usr/bin/env python3
"""Run acceptance criteria outside pytest and write a JSON report.

    python scripts/run_acceptance.py              # all, full size
    python scripts/run_acceptance.py --quick 1 4  # smoke run of two criteria
"""
import argparse
import json
import sys

from streamcut.acceptance import CRITERIA, run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("ids", nargs="*", help="criterion ids, default all")
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--report", default="acceptance_report.json")
    args = ap.parse_args()
    unknown = set(args.ids) - set(CRITERIA)
    if unknown:
        ap.error(f"unknown criteria: {sorted(unknown)}")
    results = run(args.ids or None, quick=args.quick, echo=lambda s: print(s, flush=True))
    with open(args.report, "w") as fh:
        json.dump([{"id": r.cid, "title": r.title, "passed": r.passed, "summary": r.summary,
                    "seconds": r.seconds, "detail": r.detail} for r in results], fh, indent=2, default=str)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())

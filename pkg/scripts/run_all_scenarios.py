#!/usr/bin/env python3
"""Run every built-in scenario with its default config and summarize.

Usage: python scripts/run_all_scenarios.py [--out DIR] [--seed N] [--fast]
"""

import argparse
import sys
from pathlib import Path

from cgolab.cli import SCENARIOS, ScenarioConfig, run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fast", action="store_true",
                    help="coarser ladders for a quick shakeout")
    args = ap.parse_args()

    ladders = {"nx_ladder": (17, 33, 65) if args.fast else (33, 65, 129)}
    failures = []
    for name in SCENARIOS:
        kw = dict(scenario=name, seed=args.seed, **ladders)
        if name == "stationary-phase":
            kw["nx_ladder"] = (129,) if args.fast else (257,)
            kw["tau_ladder"] = (8.0, 16.0, 32.0, 64.0, 128.0)
        if name == "carleman":
            kw["tau_ladder"] = (8.0, 16.0, 32.0, 64.0)
        report = run(ScenarioConfig(**kw), Path(args.out) / name)
        status = "ok" if report["passed"] else "FAILED"
        print(f"{name:18s} {status}")
        if not report["passed"]:
            failures.append(name)
    if failures:
        print("failed:", ", ".join(failures))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Run every experiment with its default config and write CSV reports.

usage: python scripts/run_all.py [--out-dir reports] [--seed 0] [names...]
"""
import argparse
import sys
import time

from oscillab.explab import report
from oscillab.explab.config import EXPERIMENTS, default_config, out_path
from oscillab.explab.experiments import run


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", default=list(EXPERIMENTS))
    ap.add_argument("--out-dir", default="reports")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    failed = 0
    for name in args.names:
        cfg = default_config(name, seed=args.seed, out_dir=args.out_dir)
        t = time.perf_counter()
        rows = run(cfg)
        path = report.emit(rows, "csv", out_path(cfg, "csv"))
        bad = [r.check for r in rows if r.passed is False]
        failed += len(bad)
        status = "ok" if not bad else "FAILED: " + ", ".join(bad)
        print(f"{name:12s} {time.perf_counter() - t:6.1f}s  {path}  {status}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

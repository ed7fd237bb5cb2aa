"""Simulate a handful of paths per algorithm and write them as CSV.

Usage: python3 scripts/simulate_paths.py OUTDIR [--paths 30] [--seed 0]
"""
import argparse
import csv
from pathlib import Path

from warpsim import BkConfig, CdfConfig, MzwConfig, RngStream, simulate_bk, simulate_cdf, simulate_mzw

SETTINGS = {
    "bk": lambda th: (simulate_bk, BkConfig(20, th, "phi3")),
    "cdf": lambda th: (simulate_cdf, CdfConfig(20, th, 0.5, "phi3")),
    "mzw": lambda th: (simulate_mzw, MzwConfig(10, th, target="phi3")),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--paths", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--thetas", type=float, nargs="+", default=[0.5, 1.0, 10.0])
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    root = RngStream(args.seed)
    for a, (name, make) in enumerate(SETTINGS.items()):
        for b, th in enumerate(args.thetas):
            sim, cfg = make(th)
            stream = root.child(100 * a + b)
            fn = args.out / f"{name}_theta{th:g}.csv"
            with open(fn, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["path", "x", "y"])
                for k in range(args.paths):
                    p = sim(cfg, stream.child(k))
                    for x, y in zip(p.xs, p.ys):
                        w.writerow([k, f"{x:.10g}", f"{y:.10g}"])
            print(fn)


if __name__ == "__main__":
    main()

"""Sup deviation of the MZW mean and variance as theta grows.

Usage: python3 scripts/mzw_limit_study.py
"""
import argparse

from warpsim.montecarlo import mzw_theta_limit_study


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--target", default="phi3")
    ap.add_argument("--thetas", type=float, nargs="+", default=[1, 10, 100, 1000, 10000])
    ap.add_argument("--replicates", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rows = mzw_theta_limit_study(args.m, None, args.target, args.thetas, args.replicates,
                                 master_seed=args.seed)
    for r in rows:
        print({k: v for k, v in r.items() if not hasattr(v, "shape")})


if __name__ == "__main__":
    main()

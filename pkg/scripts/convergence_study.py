"""Monte Carlo error of BK and CDF paths against the large-n limit.

Usage: python3 scripts/convergence_study.py OUTFILE.json
"""
import argparse
import json

import numpy as np

from warpsim.montecarlo import convergence_study


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80, 160])
    ap.add_argument("--theta", type=float, default=1.0)
    ap.add_argument("--target", default="phi3")
    ap.add_argument("--replicates", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = {}
    for alg in ("bk", "cdf"):
        rows = convergence_study(alg, args.sizes, args.theta, target=args.target,
                                 replicates=args.replicates, master_seed=args.seed)
        out[alg] = [{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in r.items()} for r in rows]
        for r in rows:
            print(f"{alg:>3} n={r['n']:>4} mean_err={r['mean_abs_error']:.3e} var_err={r['var_abs_error']:.3e}")
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()

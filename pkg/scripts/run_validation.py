"""Run one or more validation suites and print a pass/fail line per check.

Usage: python3 scripts/run_validation.py [SUITE ...] [--quick] [--json FILE]
"""
import argparse
import json

from warpsim.validation import SUITES, all_passed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("suites", nargs="*", default=list(SUITES))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    checks = []
    for name in args.suites:
        got = SUITES[name](args.seed, args.quick)
        for c in got:
            print(c.line(), flush=True)
        checks += got
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([c.as_dict() for c in checks], fh, indent=2)
    raise SystemExit(0 if all_passed(checks) else 1)


if __name__ == "__main__":
    main()

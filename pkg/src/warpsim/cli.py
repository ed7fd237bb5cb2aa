"""Command-line front end: ``warpsim {simulate,oracle,validate,analyze}``.

Exit codes: 0 success, 1 failed check or numerical failure, 2 usage error,
3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis as an
from . import validation as val
from .errors import (
    AccuracyError,
    DegenerateEstimateError,
    DegenerateWarpError,
    DomainError,
    IngestionError,
    InsufficientSampleError,
    InvalidElementError,
    InvalidParameterError,
    SamplingError,
    UnsupportedParameterError,
)
from .moments import MAX_EXACT_N, asymptotic_profile, exact_profile
from .rng import RngStream
from .samplers import (
    BkConfig,
    CdfConfig,
    MzwConfig,
    default_variances,
    simulate_bk,
    simulate_cdf,
    simulate_cdh,
    simulate_mzw,
    simulate_mzw_original,
)
from .warps import get_target

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3
MANIFEST_SCHEMA = 1

USAGE_ERRORS = (InvalidParameterError, UnsupportedParameterError, DomainError, InvalidElementError)
DATA_ERRORS = (IngestionError, DegenerateWarpError, DegenerateEstimateError, InsufficientSampleError)
RUNTIME_ERRORS = (SamplingError, AccuracyError)


class UsageError(Exception):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(out: Path, command: str, argv, params: dict, seed, started: str) -> Path:
    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "tool": "warpsim",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "parameters": params,
        "master_seed": seed,
        "started": started,
        "finished": _now(),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# simulate

def _simulate_one(args, k: int, rng: RngStream):
    a = args.algo
    if a == "cdh":
        return simulate_cdh(args.n, np.linspace(0.0, 1.0, args.n + 2), args.theta, rng)
    if a == "bk":
        return simulate_bk(BkConfig(args.n, args.theta, args.target), rng)
    if a == "cdf":
        return simulate_cdf(CdfConfig(args.n, args.theta, args.p, args.target), rng)
    if a == "mzw":
        return simulate_mzw(MzwConfig(args.m, args.theta, target=args.target, grid_size=args.grid_size), rng)
    return simulate_mzw_original(args.m, default_variances(args.m), rng, grid_size=args.grid_size)


def cmd_simulate(args, argv) -> int:
    started = _now()
    if args.algo in ("mzw", "mzw-original"):
        if args.m is None:
            raise UsageError(f"--algo {args.algo} needs --m")
        if args.n is not None:
            raise UsageError(f"--algo {args.algo} takes --m, not --n")
    else:
        if args.n is None:
            raise UsageError(f"--algo {args.algo} needs --n")
        if args.m is not None:
            raise UsageError(f"--algo {args.algo} takes --n, not --m")
    if args.algo == "mzw-original":
        if args.theta is not None:
            raise UsageError("--algo mzw-original has no concentration; drop --theta")
    elif args.theta is None:
        raise UsageError(f"--algo {args.algo} needs --theta")
    if args.paths < 1:
        raise UsageError("--paths must be >= 1")
    get_target(args.target)
    out = _outdir(args.out)
    root = RngStream(args.seed)
    width = len(str(args.paths - 1))
    files = []
    for k in range(args.paths):
        w = _simulate_one(args, k, root.child(k))
        name = f"path_{k:0{width}d}.csv"
        w.to_csv(out / name)
        files.append(name)
    params = {"algo": args.algo, "n": args.n, "m": args.m, "theta": args.theta, "p": args.p,
              "target": args.target, "paths": args.paths, "grid_size": args.grid_size,
              "path_streams": "RngStream(seed).child(k)", "files": files}
    write_manifest(out, "simulate", argv, params, args.seed, started)
    print(f"wrote {len(files)} paths to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle

def cmd_oracle(args, argv) -> int:
    started = _now()
    if args.n > MAX_EXACT_N:
        raise UnsupportedParameterError(f"exact moments are supported for n <= {MAX_EXACT_N}")
    if args.grid_size < 2:
        raise UsageError("--grid-size must be >= 2")
    out = _outdir(args.out)
    grid = np.linspace(0.0, 1.0, args.grid_size)
    ex = exact_profile(args.algo, grid, args.n, args.theta, args.p, args.target)
    asy = asymptotic_profile(grid, args.theta, args.target)
    extra = {"asymptotic_mean": asy.mean, "asymptotic_variance": asy.variance,
             "mean_gap": ex.mean - asy.mean, "variance_gap": ex.variance - asy.variance}
    name = f"oracle_{args.algo}.csv"
    ex.to_csv(out / name, extra=extra)
    params = {"algo": args.algo, "n": args.n, "theta": args.theta, "p": args.p if args.algo == "cdf" else None,
              "target": args.target, "grid_size": args.grid_size, "files": [name]}
    write_manifest(out, "oracle", argv, params, None, started)
    print(f"wrote {out / name}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate

def cmd_validate(args, argv) -> int:
    started = _now()
    out = _outdir(args.out)
    names = list(val.SUITES) if args.suite == "all" else [args.suite]
    report = {}
    failed = []
    for name in names:
        t0 = time.time()
        checks = val.SUITES[name](args.seed, args.quick)
        report[name] = {"passed": val.all_passed(checks), "seconds": round(time.time() - t0, 2),
                        "checks": [c.as_dict() for c in checks]}
        for c in checks:
            print(c.line())
            if not c.passed and not c.informational:
                failed.append(f"{name}: {c.name}")
    path = out / "validation.json"
    path.write_text(json.dumps(report, indent=2, default=_json_default) + "\n", encoding="utf-8")
    write_manifest(out, "validate", argv, {"suite": args.suite, "quick": args.quick}, args.seed, started)
    if failed:
        print(f"{len(failed)} check(s) failed:", file=sys.stderr)
        for f in failed:
            print(f"  {f}", file=sys.stderr)
        return EXIT_FAIL
    print(f"all checks passed; report at {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze

def parse_periods(spec: str):
    """``label=START..END`` items separated by commas, or a JSON file of such triples.

    Intervals are half-open ``[START, END)``; timestamps are ISO 8601.
    """
    p = Path(spec)
    if p.suffix == ".json" and p.exists():
        items = json.loads(p.read_text(encoding="utf-8"))
        return [(str(it["label"]), it["start"], it["end"]) for it in items]
    out = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item or ".." not in item:
            raise UsageError(f"bad period {item!r}; expected label=START..END")
        label, rng = item.split("=", 1)
        start, end = rng.split("..", 1)
        out.append((label.strip(), start.strip(), end.strip()))
    if not out:
        raise UsageError("no periods given")
    return out


def parse_synthetic(spec: str):
    """``demo`` or a JSON list of ``{label, start, hours, shift, scale}`` objects."""
    if spec == "demo":
        return list(val.PIPELINE_SPEC)
    p = Path(spec)
    if not p.exists():
        raise UsageError(f"--synthesize expects 'demo' or a JSON file, got {spec!r}")
    try:
        return [an.SyntheticPeriod(**it) for it in json.loads(p.read_text(encoding="utf-8"))]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad synthetic specification: {exc}") from exc


def cmd_analyze(args, argv) -> int:
    started = _now()
    if (args.data is None) == (args.synthesize is None):
        raise UsageError("give exactly one of --data and --synthesize")
    out = _outdir(args.out)
    if args.synthesize is not None:
        synth = parse_synthetic(args.synthesize)
        obs = an.synthesize_temperature(synth, RngStream(args.seed).child(1_000_000))
        an.write_observations_csv(obs, out / "synthetic_data.csv")
        periods = parse_periods(args.periods) if args.periods else an.period_bounds(synth)
        reference = args.reference or (val.PIPELINE_REFERENCE if args.synthesize == "demo" else synth[0].label)
    else:
        if not args.periods or not args.reference:
            raise UsageError("--data needs --periods and --reference")
        obs = an.load_observations_csv(args.data, args.timestamp_col, args.value_col)
        periods = parse_periods(args.periods)
        reference = args.reference
    datasets = an.split_periods(obs, periods)
    results = an.analyze_periods(datasets, reference, m=args.m, alpha=args.alpha, B=args.B,
                                 p=args.p, master_seed=args.seed)
    summary = []
    for r in results:
        safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in r.label)
        name = f"band_{safe}.csv"
        r.band.to_csv(out / name)
        summary.append({"label": r.label, "count": r.count, "n_i": r.n_i, "theta_hat": r.theta.value,
                        "theta_negative": r.theta.negative, **r.band.metadata(),
                        "contains_zero": r.band.contains_zero(),
                        "fraction_above_zero": float(r.band.above_zero().mean()), "file": name})
    (out / "bands.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n",
                                    encoding="utf-8")
    params = {"data": args.data, "synthesize": args.synthesize, "periods": [list(map(str, p)) for p in periods],
              "reference": reference, "m": args.m, "alpha": args.alpha, "B": args.B, "p": args.p,
              "skipped_rows": int(obs.skipped)}
    write_manifest(out, "analyze", argv, params, args.seed, started)
    for s in summary:
        state = "contains 0" if s["contains_zero"] else f"above 0 on {s['fraction_above_zero']:.0%} of grid"
        print(f"{s['label']}: theta_hat={s['theta_hat']:.4g} h={s['h']:.4g} band {state}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="warpsim", description="Random warping function simulation and analysis.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker cap; results do not depend on it")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write sampled paths as CSV")
    s.add_argument("--algo", required=True, choices=["cdh", "bk", "cdf", "mzw", "mzw-original"])
    s.add_argument("--n", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--theta", type=float)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--target", default="phi1", help="phi1, phi2, phi3 or file:PATH")
    s.add_argument("--paths", type=int, default=30)
    s.add_argument("--grid-size", type=int, default=2048, help="nodes of MZW paths")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    o = sub.add_parser("oracle", help="exact and limiting moment profiles")
    o.add_argument("--algo", required=True, choices=["bk", "cdf"])
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--theta", type=float, required=True)
    o.add_argument("--p", type=float, default=0.5)
    o.add_argument("--target", default="phi1")
    o.add_argument("--grid-size", type=int, default=101)
    o.add_argument("--out", required=True)

    v = sub.add_parser("validate", help="run an acceptance study")
    v.add_argument("--suite", required=True, choices=list(val.SUITES) + ["all"])
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--quick", action="store_true", help="smaller replicate counts")
    v.add_argument("--out", default="validation_out")

    a = sub.add_parser("analyze", help="bootstrap bands for period-wise distribution drift")
    a.add_argument("--data")
    a.add_argument("--synthesize", metavar="SPEC", help="'demo' or JSON list of synthetic periods")
    a.add_argument("--timestamp-col", default="timestamp")
    a.add_argument("--value-col", default="value")
    a.add_argument("--reference")
    a.add_argument("--periods", help="label=START..END,... or a JSON file")
    a.add_argument("--m", type=int, default=50)
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--B", type=int, default=100)
    a.add_argument("--p", type=float, default=0.5)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    return ap


COMMANDS = {"simulate": cmd_simulate, "oracle": cmd_oracle, "validate": cmd_validate, "analyze": cmd_analyze}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.threads < 1:
        print("warpsim: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, argv)
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"warpsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"warpsim {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RUNTIME_ERRORS as exc:
        print(f"warpsim {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

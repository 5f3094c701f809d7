"""Command line front end: ``fbmkit simulate | estimate | verify | bench``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import __version__
from .circulant import (
    build_embedding,
    cholesky_sample_oracle,
    fgn_to_fbm,
    is_power_of_two_plus_one,
    sample_fgn,
)
from .cov import HurstParameter
from .filters import NAMED_FILTERS
from .hurst import DegenerateSeriesError, EstimatorConfig, estimate_hurst, estimate_with_ci
from .io import read_series, sidecar_path, write_csv, write_sidecar, write_table
from .rng import fresh_seed

log = logging.getLogger("fbmkit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _hurst(text: str) -> float:
    try:
        return HurstParameter(float(text)).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fbmkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fbmkit {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate fBm paths (or fGn with --noise)")
    s.add_argument("--h", type=_hurst, required=True, help="Hurst index in (0, 1)")
    size = s.add_mutually_exclusive_group()
    size.add_argument("--q", type=int, help="use N = 2^q + 1 samples (default q = 10)")
    size.add_argument("--n", type=int, help="number of fGn samples / fBm steps N")
    s.add_argument("--t", type=float, default=1.0, help="time horizon T (default 1)")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, help="64-bit seed; generated and recorded if omitted")
    s.add_argument("--noise", action="store_true", help="write unit-grid fGn instead of fBm")
    s.add_argument("--format", choices=("csv", "raw"), default="csv")
    s.add_argument("-o", "--output", help="output file (CSV to stdout if omitted)")
    s.add_argument("--workers", type=int, default=1)

    e = sub.add_parser("estimate", help="estimate H from each column of a path file")
    e.add_argument("input")
    e.add_argument("--format", choices=("csv", "raw"))
    e.add_argument("--filter", dest="filter_name", choices=sorted(NAMED_FILTERS), default="increments2")
    e.add_argument("--dilations", type=_int_list, default=[1, 2, 3, 4])
    e.add_argument("--ci", type=float, metavar="LEVEL", help="add a bootstrap interval at this level")
    e.add_argument("--mc-reps", type=int, default=500)
    e.add_argument("--seed", type=int)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--json", action="store_true", help="machine-readable report")

    v = sub.add_parser("verify", help="run the built-in identity and Monte Carlo checks")
    v.add_argument("--only", action="append", choices=("cov", "filters", "circulant", "kernels", "hurst"))
    v.add_argument("--mc-reps", type=int, default=2000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--input", action="append", default=[], help="also check increments of a simulated file")
    v.add_argument("--json", action="store_true")

    b = sub.add_parser("bench", help="time the circulant sampler against the Cholesky oracle")
    b.add_argument("--h", type=_hurst, default=0.7)
    b.add_argument("--q-min", type=int, default=8)
    b.add_argument("--q-max", type=int, default=16)
    b.add_argument("--paths", type=int, default=20)
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--json", action="store_true")
    return p


def cmd_simulate(args) -> int:
    if args.n is not None:
        N = args.n
    else:
        N = 2 ** (10 if args.q is None else args.q) + 1
    if N < 2:
        raise UsageError("N must be at least 2")
    if args.count < 1:
        raise UsageError("--count must be positive")
    if not args.t > 0:
        raise UsageError("--t must be positive")
    if not is_power_of_two_plus_one(N):
        log.warning("N = %d is not 2^q + 1; the FFT length %d is not a power of two", N, 2 * (N - 1))
    seed = fresh_seed() if args.seed is None else args.seed
    fgn = sample_fgn(build_embedding(args.h, N), seed, args.count, args.workers)
    if args.noise:
        times = np.arange(1, N + 1, dtype=float)
        values = fgn.values
    else:
        path = fgn_to_fbm(fgn, args.t)
        times, values = path.times, path.values
    meta = {
        "H": args.h,
        "N": N,
        "T": args.t,
        "count": args.count,
        "seed": seed,
        "noise": args.noise,
        "format": args.format,
        "rows": int(times.size),
        "columns": ["t"] + [f"path_{i}" for i in range(args.count)],
        "library": "fbmkit",
        "version": __version__,
    }
    if args.output is None:
        if args.format != "csv":
            raise UsageError("raw output needs --output")
        write_csv(sys.stdout, meta["columns"], np.column_stack([times, values.T]))
        print(json.dumps(meta, sort_keys=True), file=sys.stderr)
        return EXIT_OK
    try:
        write_table(args.output, times, values, args.format)
        write_sidecar(args.output, meta)
    except OSError as exc:
        print(f"fbmkit: cannot write output: {exc}", file=sys.stderr)
        return EXIT_DATA
    log.info("wrote %d paths to %s (metadata %s)", args.count, args.output, sidecar_path(args.output))
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        config = EstimatorConfig.named(args.filter_name, args.dilations)
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        series = read_series(args.input, args.format)
    except (OSError, ValueError) as exc:
        print(f"fbmkit: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_DATA
    seed = args.seed
    if args.ci is not None and seed is None:
        seed = fresh_seed()
    report, failures = [], 0
    for i, (name, x) in enumerate(series.items()):
        try:
            if args.ci is None:
                res = estimate_hurst(x, config)
            else:
                res = estimate_with_ci(x, config, args.ci, args.mc_reps, seed + i, args.workers)
            report.append({"series": name, **res.to_dict()})
        except (DegenerateSeriesError, ValueError) as exc:
            failures += 1
            report.append({"series": name, "error": str(exc)})
    doc = {
        "input": str(args.input),
        "filter": args.filter_name,
        "dilations": list(config.dilations),
        "seed": seed,
        "version": __version__,
        "results": report,
    }
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        _print_estimates(doc)
    return EXIT_DATA if failures == len(report) else EXIT_OK


def _print_estimates(doc) -> None:
    print(f"filter {doc['filter']}, dilations {doc['dilations']}")
    for r in doc["results"]:
        if "error" in r:
            print(f"{r['series']}: error: {r['error']}")
            continue
        flag = "" if r["in_model_range"] else "  (outside (0, 1))"
        line = f"{r['series']}: H_hat = {r['h_hat']:.6f}{flag}"
        if r["ci"]:
            ci = r["ci"]
            line += f"  {100 * ci['level']:g}% CI [{ci['lower']:.6f}, {ci['upper']:.6f}]"
        print(line)
        for d in r["dilations"]:
            print(f"    m={d['m']:<3d} V={d['V']:.6e} log V={d['log_V']:+.6f}")


def cmd_verify(args) -> int:
    from .verify import Context, run_checks

    ctx = Context(mc_reps=args.mc_reps, seed=args.seed, workers=args.workers)
    results = run_checks(args.only, ctx, args.input)
    if args.json:
        print(json.dumps([r.__dict__ for r in results], indent=2))
    else:
        for r in results:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.group:<9s} {r.name}: {r.detail}")
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _best_time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rows(H, sizes, paths, repeat, seed) -> list:
    rows = []
    for N in sizes:
        t_embed = _best_time(lambda: build_embedding(H, N), repeat)
        e = build_embedding(H, N)
        t_sample = _best_time(lambda: sample_fgn(e, seed, paths), repeat)
        row = {
            "N": N,
            "M": e.M,
            "power_of_two": is_power_of_two_plus_one(N),
            "embedding_s": t_embed,
            "circulant_per_path_s": t_sample / paths,
            "circulant_per_point_s": t_sample / paths / N,
            "cholesky_per_path_s": None,
        }
        if N <= 2048:
            t_chol = _best_time(lambda: cholesky_sample_oracle(H, N, seed, paths), repeat)
            row["cholesky_per_path_s"] = t_chol / paths
        rows.append(row)
    return rows


def cmd_bench(args) -> int:
    if args.q_min < 1 or args.q_max < args.q_min:
        raise UsageError("need 1 <= --q-min <= --q-max")
    sizes = [2**q + 1 for q in range(args.q_min, args.q_max + 1)]
    rows = bench_rows(args.h, sizes, args.paths, args.repeat, args.seed)
    compare = bench_rows(args.h, [1500, 2049], args.paths, args.repeat, args.seed)
    doc = {"H": args.h, "paths": args.paths, "grid": rows, "non_power_of_two": compare, "version": __version__}
    if args.json:
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    print(f"{'N':>8s} {'M':>8s} {'embed [ms]':>11s} {'circ/path [ms]':>15s} {'chol/path [ms]':>15s}")
    for r in rows + compare:
        chol = "-" if r["cholesky_per_path_s"] is None else f"{1e3 * r['cholesky_per_path_s']:.3f}"
        print(
            f"{r['N']:>8d} {r['M']:>8d} {1e3 * r['embedding_s']:>11.3f} "
            f"{1e3 * r['circulant_per_path_s']:>15.3f} {chol:>15s}"
        )
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(levelname)s: %(message)s",
    )
    if getattr(args, "workers", 1) < 1:
        print("fbmkit: --workers must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fbmkit: {exc}", file=sys.stderr)
        return EXIT_USAGE

"""Command-line interface.

Subcommands: ``verify`` (run an inequality suite; exit 0 iff every case
holds), ``sweep`` (tabulate a suite or run pipelines over parameter lists),
``factor`` / ``dlog`` (seeded end-to-end runs, transcript JSON) and ``bound``
(bound tables).

Exit codes: 0 success, 1 algorithmic failure (repetitions exhausted or a
case violated), 2 usage or precondition error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from . import suites
from .dlog import DEFAULT_MAX_REPETITIONS as DLOG_MAX_REPETITIONS
from .dlog import DEFAULT_S_MIN as DLOG_S_MIN
from .dlog import DlogConfig, run_dlog
from .dlog import choose_q as dlog_choose_q
from .factoring import DEFAULT_S_MIN as FACTOR_S_MIN
from .factoring import FactoringConfig, run_factoring

DEFAULT_SEED = 2024
EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
MODES = ("up1", "up2", "up3", "qaup1", "qaup2", "factor", "dlog")


class UsageError(Exception):
    pass


# -- output -------------------------------------------------------------------


def _csv_cell(value):
    if isinstance(value, (list, dict, tuple)):
        return json.dumps(value, sort_keys=True)
    if value is None:
        return ""
    return value


def rows_to_csv(rows: Sequence[dict]) -> str:
    """RFC-4180 CSV with a header row; nested values are JSON-encoded."""
    header: list[str] = []
    for row in rows:
        for name in row:
            if name not in header:
                header.append(name)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in row.items()})
    return buf.getvalue()


def _clean(value):
    # NaN is not valid JSON; report it as null
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def emit(payload: dict, rows: Sequence[dict], fmt: str, out: Optional[str]) -> None:
    if fmt == "csv":
        text = rows_to_csv([_clean(r) for r in rows])
    else:
        text = json.dumps(_clean({**payload, "cases": list(rows)}), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- suites ---------------------------------------------------------------------


def _need(values, name):
    if not values:
        raise UsageError(f"--{name} needs at least one value")
    return values


def run_suite(args) -> list[dict]:
    mode = args.mode
    if mode == "up1":
        return suites.up1_cases(_need(args.q, "q"), args.trials, args.seed, args.exhaustive_max)
    if mode == "up2":
        return suites.up2_cases(_need(args.q, "q"), args.trials, args.seed, args.exhaustive_max)
    if mode == "up3":
        return suites.up3_cases(_need(args.q, "q"), args.trials, args.seed)
    if mode == "qaup1":
        rows = []
        if args.grid in ("factoring", "both"):
            rows += suites.qaup1_factoring_cases(_need(args.r, "r"), _need(args.s_min, "s-min"))
        if args.grid in ("tiny", "both"):
            rows += suites.qaup1_tiny_cases(args.p_max, args.q_max)
        return rows
    if mode == "qaup2":
        return suites.qaup2_cases(_need(args.p, "p"), _need(args.s_min_dlog, "s-min-dlog"))
    if mode == "factor":
        return suites.easy_factoring_cases() + suites.factoring_certificate_cases(_need(args.r, "r"))
    if mode == "dlog":
        ps = _need(args.p, "p")
        return suites.dlog_easy_cases(ps) + suites.dlog_certificate_cases(ps, _need(args.s_min_dlog, "s-min-dlog"))
    raise UsageError(f"unknown mode {mode!r}")


def _config(args) -> dict:
    skip = {"func", "format", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_verify(args) -> int:
    rows = run_suite(args)
    bad = suites.failures(rows)
    emit(
        {"command": "verify", "mode": args.mode, "config": _config(args),
         "n_cases": len(rows), "n_failures": len(bad), "all_hold": not bad},
        rows, args.format, args.out,
    )
    return EXIT_OK if not bad else EXIT_FAILURE


def _threads() -> int:
    raw = os.environ.get("THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"THREADS={raw!r} is not an integer")


def _factor_case(n, seed, args):
    tr = run_factoring(FactoringConfig(n, seed=seed, s_min=args.factor_s_min, max_repetitions=args.max_repetitions))
    return {"key": [n, seed], "N": n, "seed": seed, "success": tr.success, "factor": tr.factor,
            "method": tr.method, "repetitions": tr.repetitions, "x": tr.x, "r_oracle": tr.r_oracle,
            "holds": tr.success}


def _dlog_case(p, r, seed, args):
    g = suites.smallest_generator(p)
    x = pow(g, r, p)
    tr = run_dlog(DlogConfig(p, g, x, seed=seed, s_min=args.dlog_s_min, max_repetitions=args.dlog_max_repetitions))
    return {"key": [p, r, seed], "p": p, "g": g, "x": x, "r_expected": r % (p - 1), "seed": seed,
            "success": tr.success, "r": tr.r, "q": tr.q, "repetitions": tr.repetitions,
            "holds": bool(tr.success and tr.r == r % (p - 1))}


def cmd_sweep(args) -> int:
    seeds = _need(args.seeds, "seeds")
    if args.mode == "factor":
        jobs = [(_factor_case, (n, s, args)) for n in _need(args.n, "n") for s in seeds]
        for n in args.n:
            FactoringConfig(n, s_min=args.factor_s_min, max_repetitions=args.max_repetitions)
    elif args.mode == "dlog":
        jobs = [(_dlog_case, (p, r, s, args)) for p in _need(args.p, "p") for r in _need(args.r, "r") for s in seeds]
    else:
        rows = run_suite(args)
        bad = suites.failures(rows)
        emit({"command": "sweep", "mode": args.mode, "config": _config(args),
              "n_cases": len(rows), "n_failures": len(bad)}, rows, args.format, args.out)
        return EXIT_OK
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = suites.sorted_rows(pool.map(lambda job: job[0](*job[1]), jobs))
    bad = suites.failures(rows)
    emit({"command": "sweep", "mode": args.mode, "config": _config(args),
          "n_cases": len(rows), "n_failures": len(bad)}, rows, args.format, args.out)
    return EXIT_OK if not bad else EXIT_FAILURE


# -- pipelines ------------------------------------------------------------------


def _write_text(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_factor(args) -> int:
    config = FactoringConfig(args.N, seed=args.seed, s_min=args.s_min, max_repetitions=args.max_repetitions,
                             allow_gcd_shortcut=not args.no_gcd_shortcut)
    tr = run_factoring(config)
    _write_text(json.dumps(_clean(tr.to_dict()), indent=2, sort_keys=True) + "\n", args.out)
    if tr.success:
        print(f"factor {tr.factor} of {args.N} ({tr.method}, {tr.repetitions} repetitions)", file=sys.stderr)
        return EXIT_OK
    print(f"no factor of {args.N} within {args.max_repetitions} repetitions", file=sys.stderr)
    return EXIT_FAILURE


def cmd_dlog(args) -> int:
    config = DlogConfig(args.p, args.g, args.x, seed=args.seed, s_min=args.s_min, max_repetitions=args.max_repetitions)
    tr = run_dlog(config)
    _write_text(json.dumps(_clean(tr.to_dict()), indent=2, sort_keys=True) + "\n", args.out)
    if tr.success:
        print(f"r = {tr.r} ({tr.repetitions} repetitions)", file=sys.stderr)
        return EXIT_OK
    print(f"no discrete log within {args.max_repetitions} repetitions", file=sys.stderr)
    return EXIT_FAILURE


def cmd_bound(args) -> int:
    if args.kind == "factor":
        if args.r is None or args.t is None or args.s is None:
            raise UsageError("bound factor needs --r, --t and --s")
        rows = suites.factor_bound_rows(args.r, args.t, args.s)
    else:
        if args.p is None:
            raise UsageError("bound dlog needs --p")
        q = dlog_choose_q(args.p) if args.q is None else args.q
        rows = suites.dlog_bound_rows(args.p, q, args.g, args.x, args.k)
    emit({"command": "bound", "kind": args.kind, "config": _config(args)}, rows, args.format, args.out)
    return EXIT_OK if all(r["holds"] for r in rows) else EXIT_FAILURE


# -- parser ---------------------------------------------------------------------


def _add_output(p: argparse.ArgumentParser, fmt: bool = True) -> None:
    if fmt:
        p.add_argument("--format", choices=("json", "csv"), default="json", help="report format (default json)")
    p.add_argument("--out", metavar="FILE", help="write the report to FILE instead of standard output")


def _add_suite_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--q", type=int, nargs="+", default=[8, 16], help="moduli for up1/up2/up3 (default 8 16)")
    p.add_argument("--trials", type=int, default=100, help="random cases per q above --exhaustive-max (default 100)")
    p.add_argument("--exhaustive-max", type=int, default=suites.EXHAUSTIVE_MAX_Q,
                   help=f"enumerate all subsets for q up to this (default {suites.EXHAUSTIVE_MAX_Q})")
    p.add_argument("--r", type=int, nargs="+", default=[3, 4, 5, 6], help="orders for qaup1/factor (default 3 4 5 6)")
    p.add_argument("--s-min", type=float, nargs="+", default=[FACTOR_S_MIN, 10.0, 20.0],
                   help="s thresholds for the qaup1 factoring grid (default 2pi 10 20)")
    p.add_argument("--grid", choices=("factoring", "tiny", "both"), default="factoring", help="qaup1 grid (default factoring)")
    p.add_argument("--p-max", type=int, default=6, help="tiny grid: largest p (default 6)")
    p.add_argument("--q-max", type=int, default=12, help="tiny grid: largest q (default 12)")
    p.add_argument("--p", type=int, nargs="+", default=[11, 13, 17, 23], help="primes for qaup2/dlog (default 11 13 17 23)")
    p.add_argument("--s-min-dlog", type=float, nargs="+", default=[DLOG_S_MIN],
                   help=f"s thresholds for dlog suites (default {DLOG_S_MIN})")
    p.add_argument("--seed", type=int, default=0, help="seed for random cases (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qaup", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run an inequality suite; exit 0 iff every case holds")
    _add_suite_options(p)
    _add_output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="tabulate a suite, or run the pipelines over parameter lists")
    _add_suite_options(p)
    p.add_argument("--n", type=int, nargs="+", default=[15, 21, 33, 35, 55], help="factor mode: moduli")
    p.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3], help="pipeline seeds (default 1 2 3)")
    p.add_argument("--max-repetitions", type=int, default=200, help="factor mode repetition cap (default 200)")
    p.add_argument("--dlog-max-repetitions", type=int, default=DLOG_MAX_REPETITIONS,
                   help=f"dlog mode repetition cap (default {DLOG_MAX_REPETITIONS})")
    p.add_argument("--factor-s-min", type=float, default=FACTOR_S_MIN)
    p.add_argument("--dlog-s-min", type=float, default=DLOG_S_MIN)
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("factor", help="factor N; transcript JSON on standard output")
    p.add_argument("N", type=int)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"default {DEFAULT_SEED}")
    p.add_argument("--max-repetitions", type=int, default=200, help="default 200")
    p.add_argument("--s-min", type=float, default=FACTOR_S_MIN, help="lower limit on s = q/p (default 2pi)")
    p.add_argument("--no-gcd-shortcut", action="store_true", help="resample x instead of accepting gcd(x, N) > 1")
    _add_output(p, fmt=False)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("dlog", help="discrete log of x to base g mod p; transcript JSON on standard output")
    p.add_argument("p", type=int)
    p.add_argument("g", type=int)
    p.add_argument("x", type=int)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"default {DEFAULT_SEED}")
    p.add_argument("--max-repetitions", type=int, default=DLOG_MAX_REPETITIONS, help=f"default {DLOG_MAX_REPETITIONS}")
    p.add_argument("--s-min", type=float, default=DLOG_S_MIN, help=f"lower limit on s = q/(p-1) (default {DLOG_S_MIN})")
    _add_output(p, fmt=False)
    p.set_defaults(func=cmd_dlog)

    p = sub.add_parser("bound", help="print a bound table")
    p.add_argument("kind", choices=("factor", "dlog"))
    p.add_argument("--r", type=int, help="factor: order r")
    p.add_argument("--t", type=int, help="factor: p = r t")
    p.add_argument("--s", type=float, help="factor: q / p")
    p.add_argument("--p", type=int, help="dlog: prime p")
    p.add_argument("--q", type=int, help="dlog: padded size (default: least power of two with s > 10)")
    p.add_argument("--g", type=int, help="dlog: generator (default: least generator)")
    p.add_argument("--x", type=int, help="dlog: target (default: g^((p-1)/2 + 1))")
    p.add_argument("--k", type=int, default=0, help="dlog: third-register exponent (default 0)")
    _add_output(p)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        # PreconditionError, SizeLimitError, NotCoprimeError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

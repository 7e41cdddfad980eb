"""Command-line interface.

Every subcommand writes CSV files into ``--out-dir`` (default ``$SMALLFDR_OUT_DIR``
or ``./smallfdr-out``) together with ``<command>.meta.json``, which records
the resolved configuration.  Files are written to a temporary name and then
renamed, so an interrupted run never leaves a partial CSV behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .confidence import confidence_posterior
from .errors import DataError, DegenerateInputError, DomainError, SmallFDRError, UnsupportedModelError
from .fit import DELTA_FLOOR, FitResult, Pi0Bounds, fit_mixture
from .mixture import lfdr
from .pipeline import DEFAULT_METHODS, analyze, preprocess, read_table, write_ecdf_csv, write_fit_csv, write_report_csv
from .simulate import (
    DEFAULT_LFDR_BOUNDS,
    MethodKind,
    MethodSpec,
    SimulationConfig,
    run_coverage_study,
    run_rmse_study,
)
from .special_functions import INFINITE

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DOMAIN = 4
EXIT_DEGENERATE = 5
EXIT_DATA = 6
EXIT_UNSUPPORTED = 7

OUT_DIR_ENV = "SMALLFDR_OUT_DIR"


class _UsageError(Exception):
    pass


class _ArgDomainError(Exception):
    """Well-formed argument with an out-of-range value.

    Not a ValueError, so argparse lets it through instead of reporting a
    usage error.
    """


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _df_arg(text: str) -> float:
    if text.strip().lower() in {"inf", "infinite", "infinity"}:
        return INFINITE
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"df must be a positive number or 'inf', got {text!r}") from None
    if not value > 0:
        raise _ArgDomainError(f"df must be positive, got {value}")
    return value


def _bounds_arg(text: str) -> Pi0Bounds:
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"pi0 bounds must look like 'lo,hi', got {text!r}") from None
    try:
        return Pi0Bounds(lo, hi)
    except DomainError as exc:
        raise _ArgDomainError(str(exc)) from None


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _fmt_df(df: float) -> str:
    return "inf" if math.isinf(df) else repr(df)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed_arg, default=0, help="random seed (simulations)")
    common.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_DIR_ENV} or ./smallfdr-out)")
    common.add_argument("--df", type=_df_arg, default=INFINITE, help="degrees of freedom, a number or 'inf'")

    parser = _Parser(prog="smallfdr", description="Small-scale empirical Bayes and confidence inference.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def stats_args(p):
        p.add_argument("--u", type=float, action="append", default=[], help="reduced statistic |t| (repeatable)")
        p.add_argument("--stats-csv", help="CSV file with a 'u' column")

    def fit_args(p):
        p.add_argument("--pi0-bounds", type=_bounds_arg, default=Pi0Bounds(0.0, 1.0), metavar="LO,HI")
        p.add_argument("--delta-floor", type=float, default=DELTA_FLOOR)
        p.add_argument("--delta-ceiling", type=float, default=None)

    p = sub.add_parser("fit", parents=[common], help="fit the two-group mixture to statistics")
    stats_args(p)
    fit_args(p)

    p = sub.add_parser("lfdr", parents=[common], help="fit and report the LFDR of each statistic")
    stats_args(p)
    fit_args(p)

    p = sub.add_parser("confidence", parents=[common], help="p-values and confidence intervals")
    stats_args(p)
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("analyze", parents=[common], help="case-study pipeline on an abundance table")
    p.add_argument("--data", required=True, help="CSV with a 'feature' column and one column per sample")
    p.add_argument("--design", required=True, help="CSV with columns sample,group")
    p.add_argument("--case", default=None, help="case group label")
    p.add_argument("--control", default="control", help="control group label")
    p.add_argument("--lfdr-bounds", type=_bounds_arg, action="append", default=None, metavar="LO,HI")
    p.add_argument("--no-preprocess", action="store_true", help="skip the percentile shift and log transform")
    p.add_argument("--per-feature-shift", action="store_true", help="shift by each feature's own control percentile")

    for name, reps in (("sim-rmse", 100), ("sim-coverage", 800)):
        p = sub.add_parser(name, parents=[common], help=f"{name[4:]} simulation study")
        p.add_argument("--alt-delta", type=float, default=2.0)
        p.add_argument("--n-null", type=int, default=reps)
        p.add_argument("--n-alt", type=int, default=reps)
        p.add_argument("--pi1-step", type=float, default=0.01)
        p.add_argument("--lfdr-bounds", type=_bounds_arg, action="append", default=None, metavar="LO,HI")
        p.add_argument("--alpha", type=float, default=0.05)
    return parser


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _out_dir(args) -> Path:
    path = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or "smallfdr-out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _render(writer_fn, *args) -> str:
    buf = io.StringIO()
    writer_fn(*args, buf)
    return buf.getvalue()


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _commit(out: Path, files: dict[str, str], command: str, config: dict) -> list[Path]:
    """Write all outputs, then the metadata sidecar."""
    written = []
    for name, text in files.items():
        _write_atomic(out / name, text)
        written.append(out / name)
    meta = {"program": "smallfdr", "version": __version__, "command": command, "config": config,
            "outputs": sorted(files)}
    _write_atomic(out / f"{command}.meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return written


def _read_stats(args) -> list[float]:
    values = list(args.u)
    if args.stats_csv:
        try:
            with open(args.stats_csv, newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                if "u" not in (reader.fieldnames or []):
                    raise DataError(f"{args.stats_csv}: no 'u' column")
                for row in reader:
                    values.append(float(row["u"]))
        except ValueError as exc:
            raise DataError(f"{args.stats_csv}: {exc}") from None
    if not values:
        raise _UsageError("no statistics given; use --u or --stats-csv")
    if any(not (math.isfinite(v) and v >= 0) for v in values):
        raise DomainError("statistics must be finite and nonnegative")
    return values


def _fit_config(args) -> dict:
    return {
        "df": _fmt_df(args.df),
        "pi0_bounds": [args.pi0_bounds.lower, args.pi0_bounds.upper],
        "delta_floor": args.delta_floor,
        "delta_ceiling": args.delta_ceiling,
    }


def _describe_fit(fit: FitResult) -> str:
    return (
        f"pi0_hat={fit.pi0_hat:.6g} delta_hat={fit.delta_hat:.6g} loglik={fit.log_likelihood:.6g} "
        f"n={fit.n} bounds={fit.bounds} df={_fmt_df(fit.df)}"
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_fit(args, out: Path) -> str:
    stats = _read_stats(args)
    fit = fit_mixture(stats, args.df, args.pi0_bounds, args.delta_floor, args.delta_ceiling)
    _commit(out, {"fit.csv": _render(write_fit_csv, fit)}, "fit", {"u": stats, **_fit_config(args)})
    return _describe_fit(fit)


def _cmd_lfdr(args, out: Path) -> str:
    stats = _read_stats(args)
    fit = fit_mixture(stats, args.df, args.pi0_bounds, args.delta_floor, args.delta_ceiling)
    values = np.atleast_1d(lfdr(fit.model, np.asarray(stats)))
    rows = [[repr(u), repr(float(v))] for u, v in zip(stats, values)]
    _commit(
        out,
        {"lfdr.csv": _rows_csv(["u", "lfdr"], rows), "fit.csv": _render(write_fit_csv, fit)},
        "lfdr",
        {"u": stats, **_fit_config(args)},
    )
    lines = [_describe_fit(fit)] + [f"u={u:g} lfdr={float(v):.6g}" for u, v in zip(stats, values)]
    return "\n".join(lines)


def _cmd_confidence(args, out: Path) -> str:
    stats = _read_stats(args)
    rows, lines = [], []
    for u in stats:
        post = confidence_posterior(u, args.df)
        lo, hi = post.interval(args.alpha)
        rows.append([repr(u), repr(post.null_mass), repr(lo), repr(hi), str(post.degenerate).lower()])
        note = " (degenerate: unit atom at 0)" if post.degenerate else ""
        lines.append(f"u={u:g} p_value={post.null_mass:.4g} interval=[{lo:.6g}, {hi:.6g}]{note}")
    _commit(
        out,
        {"confidence.csv": _rows_csv(["u", "p_value", "lower", "upper", "degenerate"], rows)},
        "confidence",
        {"u": stats, "df": _fmt_df(args.df), "alpha": args.alpha},
    )
    return "\n".join(lines)


def _cmd_analyze(args, out: Path) -> str:
    try:
        table = read_table(args.data, args.design, case=args.case, control=args.control)
    except OSError as exc:
        raise _InputError(str(exc)) from None
    if not args.no_preprocess:
        table = preprocess(table, pooled=not args.per_feature_shift)
    methods = DEFAULT_METHODS
    if args.lfdr_bounds:
        methods = (MethodSpec.observed_confidence(),) + tuple(MethodSpec(MethodKind.LFDR, b) for b in args.lfdr_bounds)
    report = analyze(table, methods)
    files = {
        "report.csv": _render(write_report_csv, report),
        "fit.csv": _render(write_fit_csv, report.fit),
        "ecdf.csv": _render(write_ecdf_csv, report),
    }
    config = {
        "data": str(args.data),
        "design": str(args.design),
        "case": table.case_label,
        "control": table.control_label,
        "preprocess": not args.no_preprocess,
        "per_feature_shift": bool(args.per_feature_shift),
        "methods": [m.label for m in methods],
        "table_metadata": report.metadata,
    }
    _commit(out, files, "analyze", config)
    return f"{len(report.features)} features; simultaneous fit: {_describe_fit(report.fit)}"


def _sim_config(args) -> SimulationConfig:
    if not 0 < args.pi1_step <= 1:
        raise DomainError("--pi1-step must lie in (0, 1]")
    steps = int(round(1.0 / args.pi1_step))
    grid = tuple(min(1.0, round(i * args.pi1_step, 12)) for i in range(steps + 1))
    bounds = args.lfdr_bounds or [Pi0Bounds(lo, hi) for lo, hi in DEFAULT_LFDR_BOUNDS]
    first = MethodSpec.zero_posterior() if args.command == "sim-rmse" else MethodSpec.improper_bayes()
    methods = (first, MethodSpec.observed_confidence()) + tuple(MethodSpec(MethodKind.LFDR, b) for b in bounds)
    return SimulationConfig(
        alt_delta=args.alt_delta, n_null_reps=args.n_null, n_alt_reps=args.n_alt,
        pi1_grid=grid, alpha=args.alpha, seed=args.seed, methods=methods,
    )


def _cmd_sim(args, out: Path) -> str:
    if math.isfinite(args.df):
        raise UnsupportedModelError("simulations use the normal model; pass --df inf")
    config = _sim_config(args)
    study = "rmse" if args.command == "sim-rmse" else "coverage"
    report = run_rmse_study(config) if study == "rmse" else run_coverage_study(config)
    meta = {
        "study": study,
        "alt_delta": config.alt_delta,
        "n_null_reps": config.n_null_reps,
        "n_alt_reps": config.n_alt_reps,
        "pi1_step": args.pi1_step,
        "alpha": config.alpha,
        "seed": config.seed,
        "df": "inf",
        "methods": [m.label for m in config.methods],
    }
    _commit(out, {f"{study}.csv": _render(report.write_csv)}, args.command, meta)
    return f"wrote {study}.csv ({len(report.rows)} rows)"


class _InputError(Exception):
    pass


_COMMANDS = {
    "fit": _cmd_fit,
    "lfdr": _cmd_lfdr,
    "confidence": _cmd_confidence,
    "analyze": _cmd_analyze,
    "sim-rmse": _cmd_sim,
    "sim-coverage": _cmd_sim,
}


def main(argv=None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        out = _out_dir(args)
        message = _COMMANDS[args.command](args, out)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (_InputError, OSError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateInputError as exc:
        print(f"error: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except UnsupportedModelError as exc:
        print(f"error: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (DomainError, SmallFDRError, _ArgDomainError) as exc:
        print(f"error: domain: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(message)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

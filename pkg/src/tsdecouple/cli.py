"""Command-line entry point.

Exit codes: 0 success, 1 engine/stage error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import arima, hypothesis, series_core, unit_root
from .errors import ConfigError, EngineError
from .hypothesis import DEFAULT_PERIOD_SETS
from .ingest import align_and_clean, parse_quote_csv
from .pipeline import RunConfig, _parse_periods, run_pipeline
from .report import emit_report

logger = logging.getLogger("tsdecouple")


def _load(path, column):
    raw = parse_quote_csv(path, column)
    return raw.dropna()


def _load_pair(a, b, column):
    pair = align_and_clean(parse_quote_csv(a, column), parse_quote_csv(b, column), ("a", "b"))
    return pair.a, pair.b


def cmd_run(args) -> int:
    cfg = RunConfig.from_json(
        args.config,
        output_dir=args.output_dir,
        volatility_window=args.window,
        leading_lags=args.lags,
        value_column=args.column,
        seed=args.seed,
        svg=True if args.svg else None,
    )
    report = run_pipeline(cfg)
    written = emit_report(report, cfg.output_dir)
    print(f"wrote {len(written)} files to {cfg.output_dir}")
    for e in report.errors:
        print(f"stage {e.stage}: {e.error_type}: {e.message}", file=sys.stderr)
    for e in report.skipped:
        print(f"stage {e.stage}: skipped ({e.message})", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_adf(args) -> int:
    s = _load(args.csv, args.column)
    res = unit_root.adf_test(s, args.lags)
    print(f"ADF statistic {res.statistic:.4f}  p-value {res.p_label}  "
          f"lag order {res.lag_order}  n {res.n_effective}")
    d = series_core.difference(s, 1)
    res = unit_root.adf_test(d, args.lags)
    print(f"ADF (first difference) statistic {res.statistic:.4f}  p-value {res.p_label}")
    return 0


def cmd_arima(args) -> int:
    s = _load(args.csv, args.column)
    if args.auto:
        f = arima.auto_arima(s)
    else:
        f = arima.fit(s, arima.ArimaOrder.parse(args.order))
    print(f"ARIMA{f.order}  loglik {f.log_likelihood:.3f}  AICc {f.aicc:.3f}  "
          f"converged {f.converged}")
    print("ar:", " ".join(f"{c:.4f}" for c in f.ar_coefficients) or "-")
    print("ma:", " ".join(f"{c:.4f}" for c in f.ma_coefficients) or "-")
    print(f"intercept {f.intercept:.6g}  sigma2 {f.sigma2:.6g}")
    return 0 if f.converged else 1


def cmd_volatility(args) -> int:
    s = _load(args.csv, args.column)
    vol = series_core.rolling_volatility(s, args.window)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        out.write("date,volatility\n")
        for d, v in zip(vol.dates, vol.values):
            out.write(f"{d},{float(v)!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_decouple(args) -> int:
    a, b = _load_pair(args.csv_a, args.csv_b, args.column)
    if args.volatility_window:
        a = series_core.rolling_volatility(a, args.volatility_window)
        b = series_core.rolling_volatility(b, args.volatility_window)
    da, db = series_core.difference(a, 1), series_core.difference(b, 1)
    if args.periods:
        with open(args.periods) as fh:
            sets = _parse_periods(json.load(fh))
    else:
        sets = DEFAULT_PERIOD_SETS
    full = hypothesis.mean_zero_ttest(da - db)
    print(f"{'Full sample':<16} n={full.n:<6} t={full.statistic:8.4f}  p={full.p_value:.4f}")
    for pset in sets:
        for row in hypothesis.decoupling_table(da, db, pset):
            if row.result is None:
                print(f"{row.period.label:<16} n={row.n:<6} {row.note}")
            else:
                r = row.result
                print(f"{row.period.label:<16} n={r.n:<6} t={r.statistic:8.4f}  p={r.p_value:.4f}")
    return 0


def cmd_lead(args) -> int:
    target, leader = _load_pair(args.target_csv, args.leader_csv, args.column)
    dt, dl = series_core.difference(target, 1), series_core.difference(leader, 1)
    f = hypothesis.leading_indicator_ftest(dt, dl, args.lags)
    print(f"leader -> target: F({f.df1},{f.df2}) = {f.statistic:.4f}  p = {f.p_value:.3g}")
    g_lt, g_tl = hypothesis.granger(dl, dt, args.lags)
    print(f"Granger leader -> target: F({g_lt.df1},{g_lt.df2}) = {g_lt.statistic:.4f}  p = {g_lt.p_value:.3g}")
    print(f"Granger target -> leader: F({g_tl.df1},{g_tl.df2}) = {g_tl.statistic:.4f}  p = {g_tl.p_value:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsdecouple", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def column(p):
        p.add_argument("--column", default="Adj Close", help="value column (default: Adj Close)")

    p = sub.add_parser("run", help="run the full pipeline from a JSON config")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.add_argument("--window", type=int)
    p.add_argument("--lags", type=int)
    p.add_argument("--column")
    p.add_argument("--seed", type=int)
    p.add_argument("--svg", action="store_true", help="also write SVG line charts")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adf", help="ADF test on a quote CSV and its first difference")
    p.add_argument("csv")
    column(p)
    p.add_argument("--lags", type=int, default=None)
    p.set_defaults(func=cmd_adf)

    p = sub.add_parser("arima", help="fit an ARIMA model")
    p.add_argument("csv")
    column(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--order", help="p,d,q")
    g.add_argument("--auto", action="store_true")
    p.set_defaults(func=cmd_arima)

    p = sub.add_parser("volatility", help="rolling volatility as CSV")
    p.add_argument("csv")
    column(p)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_volatility)

    p = sub.add_parser("decouple", help="per-period t-tests of differenced series")
    p.add_argument("csv_a")
    p.add_argument("csv_b")
    column(p)
    p.add_argument("--periods", help="JSON file of period sets")
    p.add_argument("--volatility-window", type=int, default=None,
                   help="test differenced rolling volatility instead of levels")
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("lead", help="leading-indicator F-test and Granger tests")
    p.add_argument("target_csv")
    p.add_argument("leader_csv")
    column(p)
    p.add_argument("--lags", type=int, required=True)
    p.set_defaults(func=cmd_lead)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (EngineError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end decoupling analysis of a tech / non-tech index pair.

Stages run in a fixed order. A stage that raises an :class:`EngineError`
is recorded in the report and every stage depending on it is skipped with a
note naming the failed prerequisite. Each numeric table cell records the
operation and arguments that produced it; :func:`rederive_cell` replays it.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import arima, correlation, hypothesis, series_core, unit_root
from .errors import ConfigError, EngineError
from .hypothesis import DEFAULT_PERIOD_SETS, Period, PeriodSet
from .ingest import align_and_clean, parse_quote_csv
from .series_core import TimeSeries, VolatilitySpec

__all__ = [
    "RunConfig",
    "Cell",
    "Table",
    "StageError",
    "Report",
    "run_pipeline",
    "rederive_cell",
    "OPERATIONS",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    tech_csv: Path
    nontech_csv: Path
    value_column: str = "Adj Close"
    volatility_window: int = 100
    leading_lags: int = 10
    periods: tuple[PeriodSet, ...] = DEFAULT_PERIOD_SETS
    significance: float = 0.05
    output_dir: Path = Path("report")
    seed: int = 0
    acf_max_lag: int = 1500
    pacf_max_lag: int = 50
    ccf_max_lag: int = 1000
    johansen_lag: int = 2
    svg: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tech_csv", Path(self.tech_csv))
        object.__setattr__(self, "nontech_csv", Path(self.nontech_csv))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        periods = tuple(
            p if isinstance(p, PeriodSet) else PeriodSet.from_dict(p) for p in self.periods
        )
        object.__setattr__(self, "periods", periods)
        if self.volatility_window < 2:
            raise ConfigError("volatility_window must be at least 2")
        if self.leading_lags < 1:
            raise ConfigError("leading_lags must be at least 1")
        if not 0.0 < self.significance < 1.0:
            raise ConfigError("significance must lie in (0, 1)")
        names = [p.name for p in periods]
        if len(set(names)) != len(names):
            raise ConfigError("period set names must be unique")

    @classmethod
    def from_json(cls, path, **overrides) -> "RunConfig":
        """Load a JSON config; relative CSV paths resolve against its folder.

        Keyword overrides that are not ``None`` replace file values.
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("tech_csv", "nontech_csv"):
            if key in data:
                p = Path(data[key])
                data[key] = p if p.is_absolute() else path.parent / p
        if "periods" in data:
            data["periods"] = _parse_periods(data["periods"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> dict:
        """JSON-ready view of the configuration (the output directory omitted)."""
        return {
            "tech_csv": str(self.tech_csv),
            "nontech_csv": str(self.nontech_csv),
            "value_column": self.value_column,
            "volatility_window": self.volatility_window,
            "leading_lags": self.leading_lags,
            "periods": [p.to_dict() for p in self.periods],
            "significance": self.significance,
            "seed": self.seed,
            "acf_max_lag": self.acf_max_lag,
            "pacf_max_lag": self.pacf_max_lag,
            "ccf_max_lag": self.ccf_max_lag,
            "johansen_lag": self.johansen_lag,
            "svg": self.svg,
        }


def _parse_periods(raw) -> tuple[PeriodSet, ...]:
    """Accept ``{name: [period, ...]}`` or ``[{"name", "periods"}, ...]``."""
    try:
        if isinstance(raw, dict):
            return tuple(
                PeriodSet(name, tuple(Period(**p) for p in rows)) for name, rows in raw.items()
            )
        return tuple(PeriodSet.from_dict(p) for p in raw)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid periods: {exc}") from exc


# --- report model ---------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    """A table value plus the operation call that produced it.

    ``args`` maps parameter names to JSON values; strings starting with
    ``@`` refer to objects in :attr:`Report.objects`. ``field`` is a dotted
    path into the operation's return value.
    """

    value: Any
    operation: str | None = None
    args: dict = field(default_factory=dict)
    field: str = ""

    def text(self) -> str:
        v = self.value
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    def provenance(self) -> dict | None:
        if self.operation is None:
            return None
        return {"operation": self.operation, "args": self.args, "field": self.field}


@dataclass
class Table:
    key: str
    title: str
    columns: list[str]
    rows: list[list[Cell]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, *cells):
        row = [c if isinstance(c, Cell) else Cell(c) for c in cells]
        if len(row) != len(self.columns):
            raise ValueError(f"{self.key}: row has {len(row)} cells, expected {len(self.columns)}")
        self.rows.append(row)

    def column(self, name: str) -> list[Cell]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def lookup(self, row_label: str, column: str) -> Cell:
        i = self.columns.index(column)
        for r in self.rows:
            if r[0].value == row_label:
                return r[i]
        raise KeyError(row_label)


@dataclass
class Plot:
    key: str
    title: str
    columns: list[str]
    rows: list[list]


@dataclass(frozen=True)
class StageError:
    stage: str
    error_type: str
    message: str
    skipped_because: str | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Report:
    config: RunConfig
    tables: dict[str, Table] = field(default_factory=dict)
    plots: dict[str, Plot] = field(default_factory=dict)
    errors: list[StageError] = field(default_factory=list)
    skipped: list[StageError] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    cleaning: dict = field(default_factory=dict)
    input_checksums: dict = field(default_factory=dict)
    objects: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return not self.errors

    def cells(self):
        """Yield ``(table_key, row_index, column, cell)`` for provenance cells."""
        for key, table in self.tables.items():
            for i, row in enumerate(table.rows):
                for col, cell in zip(table.columns, row):
                    if cell.operation is not None:
                        yield key, i, col, cell


# --- operation registry and provenance replay -----------------------------

OPERATIONS: dict[str, Callable] = {
    "series_core.summarize": series_core.summarize,
    "unit_root.adf_test": unit_root.adf_test,
    "unit_root.johansen_trace": unit_root.johansen_trace,
    "arima.auto_order": arima.auto_order,
    "arima.auto_arima": arima.auto_arima,
    "hypothesis.mean_zero_ttest": hypothesis.mean_zero_ttest,
    "hypothesis.decoupling_table": hypothesis.decoupling_table,
    "hypothesis.leading_indicator_ftest": hypothesis.leading_indicator_ftest,
    "hypothesis.granger": hypothesis.granger,
}


def _resolve(value, objects):
    if isinstance(value, str) and value.startswith("@"):
        return objects[value[1:]]
    return value


def _extract(obj, path: str):
    for part in path.split(".") if path else ():
        if part.lstrip("-").isdigit():
            obj = obj[int(part)]
        else:
            obj = getattr(obj, part)
    return obj


def rederive_cell(report: Report, cell: Cell, cache: dict | None = None):
    """Re-run the operation recorded on ``cell`` and return the field value."""
    key = json.dumps([cell.operation, cell.args], sort_keys=True)
    if cache is not None and key in cache:
        result = cache[key]
    else:
        fn = OPERATIONS[cell.operation]
        kwargs = {k: _resolve(v, report.objects) for k, v in cell.args.items()}
        result = fn(**kwargs)
        if cache is not None:
            cache[key] = result
    return _extract(result, cell.field)


class _Context:
    """Runs one operation, records the result and builds provenance cells."""

    def __init__(self, report: Report):
        self.report = report
        self._memo: dict[str, Any] = {}

    def register(self, name: str, obj) -> str:
        self.report.objects[name] = obj
        return "@" + name

    def call(self, operation: str, **args):
        key = json.dumps([operation, args], sort_keys=True, default=str)
        if key not in self._memo:
            fn = OPERATIONS[operation]
            kwargs = {k: _resolve(v, self.report.objects) for k, v in args.items()}
            self._memo[key] = fn(**kwargs)
        return _Bound(self._memo[key], operation, args)


class _Bound:
    def __init__(self, result, operation, args):
        self.result = result
        self.operation = operation
        self.args = args

    def cell(self, path: str) -> Cell:
        value = _extract(self.result, path)
        if isinstance(value, (np.floating, np.integer, np.bool_)):
            value = value.item()
        return Cell(value, self.operation, dict(self.args), path)


def _sha256(path: Path) -> str | None:
    try:
        return hashlib.sha256(path.read_bytes()).hexdigest()
    except OSError:
        return None


# --- stages ----------------------------------------------------------------


def _stage_ingest(ctx: _Context, cfg: RunConfig):
    tech = parse_quote_csv(cfg.tech_csv, cfg.value_column)
    nontech = parse_quote_csv(cfg.nontech_csv, cfg.value_column)
    pair = align_and_clean(tech, nontech, names=("tech", "nontech"))
    ctx.report.cleaning = {
        "tech_rows": len(tech),
        "tech_missing": tech.missing,
        "nontech_rows": len(nontech),
        "nontech_missing": nontech.missing,
        **pair.log.to_dict(),
    }
    y, x = pair.a, pair.b
    ctx.register("y", y)
    ctx.register("x", x)
    ctx.report.plots["levels"] = Plot(
        "levels",
        "Tech and non-tech index levels",
        ["date", "tech", "nontech"],
        [[str(d), a, b] for d, a, b in zip(y.dates, y.values.tolist(), x.values.tolist())],
    )


def _summary_table(ctx, key, title, ref):
    t = Table(key, title, ["statistic", "value"])
    bound = ctx.call("series_core.summarize", s=ref)
    for label, attr in (
        ("Minimum", "min"),
        ("1st Quartile", "q1"),
        ("Median", "median"),
        ("3rd Quartile", "q3"),
        ("Maximum", "max"),
        ("Mean", "mean"),
        ("Standard Deviation", "sd"),
        ("Starting Value", "first_value"),
        ("Latest Value", "last_value"),
        ("Observations", "n"),
    ):
        t.add(label, bound.cell(attr))
    return t


def _stage_summary(ctx: _Context, cfg: RunConfig):
    r = ctx.report
    r.tables["table01_summary_tech"] = _summary_table(
        ctx, "table01_summary_tech", "Summary statistics of the tech index (y)", "@y"
    )
    r.tables["table02_summary_nontech"] = _summary_table(
        ctx, "table02_summary_nontech", "Summary statistics of the non-tech index (x)", "@x"
    )


def _correlogram_plot(key, title, s: TimeSeries, cfg: RunConfig):
    n = len(s)
    max_acf = min(cfg.acf_max_lag, n - 1)
    max_pacf = min(cfg.pacf_max_lag, (n - 1) // 2)
    a = correlation.acf(s, max_acf)
    rows = [[int(k), float(v), "", a.confidence_band] for k, v in zip(a.lags, a.coefficients)]
    if max_pacf >= 1:
        p = correlation.pacf(s, max_pacf)
        for k, v in zip(p.lags, p.coefficients):
            rows[int(k)][2] = float(v)
    return Plot(key, title, ["lag", "acf", "pacf", "band"], rows), a


def _stage_correlograms(ctx: _Context, cfg: RunConfig):
    r = ctx.report
    y, x = r.objects["y"], r.objects["x"]
    for key, label, s in (("acf_pacf_tech", "tech", y), ("acf_pacf_nontech", "non-tech", x)):
        plot, a = _correlogram_plot(key, f"ACF and PACF of the {label} index", s, cfg)
        r.plots[key] = plot
        exit_lag = a.first_lag_inside_band()
        r.warnings.append(
            f"{label} ACF first enters the +/-{a.confidence_band:.4f} band at lag "
            f"{exit_lag if exit_lag is not None else f'>{a.lags[-1]}'}"
        )
    c = correlation.ccf(y, x, min(cfg.ccf_max_lag, len(y) - 1))
    r.plots["ccf"] = Plot(
        "ccf",
        "Cross-correlation corr(y_t, x_{t+k})",
        ["lag", "ccf", "band"],
        [[int(k), float(v), c.confidence_band] for k, v in zip(c.lags, c.coefficients)],
    )


JOHANSEN_WARNING = (
    "Johansen trace test applied to index levels whose stationarity properties are "
    "established only later (ADF); the conclusion is conditional on that assumption."
)


def _stage_johansen(ctx: _Context, cfg: RunConfig):
    t = Table(
        "table03_johansen",
        "Johansen trace test (no deterministic term)",
        ["hypothesis", "statistic", "cv_10pct", "cv_5pct", "cv_1pct", "eigenvalue"],
    )
    bound = ctx.call("unit_root.johansen_trace", a="@y", b="@x", lag_order=cfg.johansen_lag)
    for row_label, i in (("r<=1", 1), ("r=0", 0)):
        t.add(
            row_label,
            bound.cell(f"trace_statistics.{i}"),
            bound.cell(f"critical_values.{i}.0"),
            bound.cell(f"critical_values.{i}.1"),
            bound.cell(f"critical_values.{i}.2"),
            bound.cell(f"eigenvalues.{i}"),
        )
    t.notes.append(JOHANSEN_WARNING)
    ctx.report.warnings.append(JOHANSEN_WARNING)
    ctx.report.tables[t.key] = t


def _adf_row(ctx, t, label, ref):
    bound = ctx.call("unit_root.adf_test", s=ref)
    t.add(
        label,
        bound.cell("statistic"),
        bound.cell("p_value"),
        bound.cell("p_label"),
        bound.cell("lag_order"),
        bound.cell("n_effective"),
    )


ADF_COLUMNS = ["series", "statistic", "p_value", "p_label", "lag_order", "n_effective"]


def _stage_differences(ctx: _Context, cfg: RunConfig):
    r = ctx.report
    ctx.register("dy", series_core.difference(r.objects["y"], 1).rename("dy"))
    ctx.register("dx", series_core.difference(r.objects["x"], 1).rename("dx"))


def _stage_adf(ctx: _Context, cfg: RunConfig):
    r = ctx.report
    t4 = Table("table04_adf_levels", "ADF test on levels", list(ADF_COLUMNS))
    _adf_row(ctx, t4, "Tech (y)", "@y")
    _adf_row(ctx, t4, "Non-tech (x)", "@x")
    r.tables[t4.key] = t4
    t5 = Table("table05_adf_differences", "ADF test on first differences", list(ADF_COLUMNS))
    _adf_row(ctx, t5, "First-differenced Tech (dy)", "@dy")
    _adf_row(ctx, t5, "First-differenced Non-tech (dx)", "@dx")
    r.tables[t5.key] = t5


ARIMA_COLUMNS = ["series", "ar_order", "i_order", "ma_order", "aicc", "converged"]


def _arima_row(ctx, t, label, ref, with_adf=False):
    bound = ctx.call("arima.auto_arima", s=ref)
    cells = [
        label,
        bound.cell("order.p"),
        bound.cell("order.d"),
        bound.cell("order.q"),
        bound.cell("aicc"),
        bound.cell("converged"),
    ]
    if with_adf:
        adf = ctx.call("unit_root.adf_test", s=ref)
        cells += [adf.cell("statistic"), adf.cell("p_value")]
    t.add(*cells)


def _stage_arima(ctx: _Context, cfg: RunConfig):
    t = Table("table06_arima_orders", "Selected ARIMA orders", list(ARIMA_COLUMNS))
    _arima_row(ctx, t, "Tech (y)", "@y")
    _arima_row(ctx, t, "Non-tech (x)", "@x")
    _arima_row(ctx, t, "First-differenced Tech (dy)", "@dy")
    _arima_row(ctx, t, "First-differenced Non-tech (dx)", "@dx")
    ctx.report.tables[t.key] = t


def _stage_volatility(ctx: _Context, cfg: RunConfig):
    r = ctx.report
    spec = VolatilitySpec(cfg.volatility_window)
    vy = series_core.rolling_volatility(r.objects["y"], spec).rename("vol_y")
    vx = series_core.rolling_volatility(r.objects["x"], spec).rename("vol_x")
    ctx.register("vol_y", vy)
    ctx.register("vol_x", vx)
    ctx.register("dvol_y", series_core.difference(vy, 1).rename("dvol_y"))
    ctx.register("dvol_x", series_core.difference(vx, 1).rename("dvol_x"))
    r.plots["volatility"] = Plot(
        "volatility",
        f"Rolling {spec.window}-day volatility of simple percent returns",
        ["date", "vol_tech", "vol_nontech"],
        [[str(d), a, b] for d, a, b in zip(vy.dates, vy.values.tolist(), vx.values.tolist())],
    )


def _stage_volatility_models(ctx: _Context, cfg: RunConfig):
    cols = ARIMA_COLUMNS + ["adf_statistic", "adf_p_value"]
    t9 = Table("table09_arima_volatility", "Selected ARIMA orders of volatility", list(cols))
    _arima_row(ctx, t9, "Volatility of Tech (vol_y)", "@vol_y", with_adf=True)
    _arima_row(ctx, t9, "Volatility of Non-tech (vol_x)", "@vol_x", with_adf=True)
    t10 = Table(
        "table10_arima_volatility_differenced",
        "Selected ARIMA orders of differenced volatility",
        list(cols),
    )
    _arima_row(ctx, t10, "First-differenced vol_y", "@dvol_y", with_adf=True)
    _arima_row(ctx, t10, "First-differenced vol_x", "@dvol_x", with_adf=True)
    ctx.report.tables[t9.key] = t9
    ctx.report.tables[t10.key] = t10


TTEST_COLUMNS = ["period", "start", "end", "n", "t_statistic", "p_value", "mean", "reject"]


def _full_sample_row(ctx, t, label, a_ref, b_ref, cfg):
    r = ctx.report
    a, b = r.objects[a_ref[1:]], r.objects[b_ref[1:]]
    diff_ref = ctx.register(f"{a_ref[1:]}-{b_ref[1:]}", a - b)
    bound = ctx.call("hypothesis.mean_zero_ttest", s=diff_ref, level=cfg.significance)
    t.add(
        label,
        str(a.dates[0]),
        str(a.dates[-1]),
        bound.cell("n"),
        bound.cell("statistic"),
        bound.cell("p_value"),
        bound.cell("mean_estimate"),
        bound.cell("reject"),
    )


def _period_rows(ctx, t, a_ref, b_ref, cfg):
    for pset in cfg.periods:
        pref = ctx.register(f"periods:{pset.name}", pset.periods)
        bound = ctx.call(
            "hypothesis.decoupling_table", dy=a_ref, dx=b_ref, periods=pref, level=cfg.significance
        )
        for i, row in enumerate(bound.result):
            period = row.period
            if row.result is None:
                t.add(
                    period.label,
                    period.start.isoformat(),
                    period.end.isoformat(),
                    bound.cell(f"{i}.n"),
                    "NotComputable",
                    "NotComputable",
                    "",
                    "",
                )
                t.notes.append(f"{period.label}: {row.note}")
                continue
            t.add(
                period.label,
                period.start.isoformat(),
                period.end.isoformat(),
                bound.cell(f"{i}.n"),
                bound.cell(f"{i}.result.statistic"),
                bound.cell(f"{i}.result.p_value"),
                bound.cell(f"{i}.result.mean_estimate"),
                bound.cell(f"{i}.result.reject"),
            )


def _stage_level_decoupling(ctx: _Context, cfg: RunConfig):
    t7 = Table(
        "table07_level_ttest_full",
        "Mean-zero t-test of dy - dx (full sample)",
        list(TTEST_COLUMNS),
    )
    try:
        _full_sample_row(ctx, t7, "Full sample", "@dy", "@dx", cfg)
    except EngineError as exc:
        t7.add("Full sample", "", "", "", "NotComputable", "NotComputable", "", "")
        t7.notes.append(f"Full sample: NotComputable: {exc}")
    t8 = Table(
        "table08_level_ttest_periods",
        "Mean-zero t-test of dy - dx by period",
        list(TTEST_COLUMNS),
    )
    _period_rows(ctx, t8, "@dy", "@dx", cfg)
    ctx.report.tables[t7.key] = t7
    ctx.report.tables[t8.key] = t8


def _stage_volatility_decoupling(ctx: _Context, cfg: RunConfig):
    t = Table(
        "table11_volatility_ttest",
        "Mean-zero t-test of dvol_y - dvol_x (full sample and by period)",
        list(TTEST_COLUMNS),
    )
    try:
        _full_sample_row(ctx, t, "Full sample", "@dvol_y", "@dvol_x", cfg)
    except EngineError as exc:
        t.add("Full sample", "", "", "", "NotComputable", "NotComputable", "", "")
        t.notes.append(f"Full sample: NotComputable: {exc}")
    _period_rows(ctx, t, "@dvol_y", "@dvol_x", cfg)
    ctx.report.tables[t.key] = t


def _stage_leading(ctx: _Context, cfg: RunConfig):
    t = Table(
        "table12_leading_indicator",
        f"Leading-indicator and Granger F-tests ({cfg.leading_lags} lags)",
        ["test", "F", "df1", "df2", "p_value"],
    )
    p = cfg.leading_lags
    for label, target, leader in (
        ("dy leads dx", "@dx", "@dy"),
        ("dx leads dy", "@dy", "@dx"),
    ):
        b = ctx.call("hypothesis.leading_indicator_ftest", target=target, leader=leader, p=p)
        t.add(label, b.cell("statistic"), b.cell("df1"), b.cell("df2"), b.cell("p_value"))
    g = ctx.call("hypothesis.granger", a="@dy", b="@dx", p=p)
    for label, i in (("Granger dy -> dx", 0), ("Granger dx -> dy", 1)):
        t.add(label, g.cell(f"{i}.statistic"), g.cell(f"{i}.df1"), g.cell(f"{i}.df2"),
              g.cell(f"{i}.p_value"))
    ctx.report.tables[t.key] = t


# (name, function, prerequisites)
STAGES = (
    ("ingest", _stage_ingest, ()),
    ("summary", _stage_summary, ("ingest",)),
    ("correlograms", _stage_correlograms, ("ingest",)),
    ("johansen", _stage_johansen, ("ingest",)),
    ("differences", _stage_differences, ("ingest",)),
    ("adf", _stage_adf, ("differences",)),
    ("arima", _stage_arima, ("differences",)),
    ("volatility", _stage_volatility, ("ingest",)),
    ("volatility_models", _stage_volatility_models, ("volatility",)),
    ("level_decoupling", _stage_level_decoupling, ("differences",)),
    ("volatility_decoupling", _stage_volatility_decoupling, ("volatility",)),
    ("leading_indicator", _stage_leading, ("differences",)),
)


def run_pipeline(config: RunConfig) -> Report:
    """Execute every stage; errors are recorded, never raised."""
    report = Report(config)
    for key, path in (("tech_csv", config.tech_csv), ("nontech_csv", config.nontech_csv)):
        report.input_checksums[key] = _sha256(path)
    ctx = _Context(report)
    failed: dict[str, str] = {}
    for name, fn, deps in STAGES:
        blocked = next((d for d in deps if d in failed), None)
        if blocked is not None:
            root = failed[blocked]
            failed[name] = root
            report.skipped.append(
                StageError(name, "Skipped", f"prerequisite stage {blocked!r} failed", root)
            )
            continue
        logger.info("stage %s", name)
        try:
            fn(ctx, config)
        except (EngineError, OSError) as exc:
            logger.warning("stage %s failed: %s", name, exc)
            failed[name] = name
            report.errors.append(StageError(name, type(exc).__name__, str(exc)))
    return report

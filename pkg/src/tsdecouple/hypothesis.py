"""Mean-zero t-tests, interval splitting and lagged-regression F-tests."""

from __future__ import annotations

import datetime as _dt
import logging
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .errors import AlignmentError, DegenerateSeries, InsufficientData, NotComputable
from .regression import RegressionFit, lag_matrix, ols
from .series_core import TimeSeries

__all__ = [
    "Period",
    "PeriodSet",
    "PeriodSlice",
    "TTestResult",
    "FTestResult",
    "DecouplingRow",
    "RegressionFit",
    "ols",
    "mean_zero_ttest",
    "split_by_periods",
    "decoupling_table",
    "nested_f_test",
    "leading_indicator_ftest",
    "granger",
    "INTERVALS",
    "HALVES",
    "DEFAULT_PERIOD_SETS",
]

logger = logging.getLogger(__name__)


def _to_date(value) -> _dt.date:
    if isinstance(value, _dt.datetime):
        return value.date()
    if isinstance(value, _dt.date):
        return value
    if isinstance(value, np.datetime64):
        return value.astype("datetime64[D]").astype(_dt.date)
    return _dt.date.fromisoformat(str(value))


@dataclass(frozen=True)
class Period:
    label: str
    start: _dt.date
    end: _dt.date

    def __post_init__(self):
        object.__setattr__(self, "start", _to_date(self.start))
        object.__setattr__(self, "end", _to_date(self.end))
        if self.start > self.end:
            raise ValueError(f"period {self.label!r} starts after it ends")

    def to_dict(self) -> dict:
        return {"label": self.label, "start": self.start.isoformat(), "end": self.end.isoformat()}


@dataclass(frozen=True)
class PeriodSet:
    """Named collection of non-overlapping periods with unique labels."""

    name: str
    periods: tuple[Period, ...]

    def __post_init__(self):
        periods = tuple(p if isinstance(p, Period) else Period(**p) for p in self.periods)
        object.__setattr__(self, "periods", periods)
        labels = [p.label for p in periods]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate period labels in {self.name!r}")
        ordered = sorted(periods, key=lambda p: p.start)
        for prev, nxt in zip(ordered, ordered[1:]):
            if nxt.start <= prev.end:
                raise ValueError(f"periods {prev.label!r} and {nxt.label!r} overlap")

    def __iter__(self):
        return iter(self.periods)

    def __len__(self):
        return len(self.periods)

    def to_dict(self) -> dict:
        return {"name": self.name, "periods": [p.to_dict() for p in self.periods]}

    @classmethod
    def from_dict(cls, data: dict) -> "PeriodSet":
        return cls(data["name"], tuple(Period(**p) for p in data["periods"]))


# Contiguous: each period starts the day after the previous one ends.
INTERVALS = PeriodSet(
    "intervals",
    (
        Period("GFC", "2006-03-01", "2010-02-28"),
        Period("Post-GFC", "2010-03-01", "2015-02-28"),
        Period("Pre-covid", "2015-03-01", "2020-01-19"),
        Period("Covid", "2020-01-20", "2022-03-31"),
        Period("Post-Covid", "2022-04-01", "2023-03-31"),
    ),
)
HALVES = PeriodSet(
    "halves",
    (
        Period("First Half", "2006-03-01", "2015-02-28"),
        Period("Second Half", "2015-03-01", "2023-03-31"),
    ),
)
DEFAULT_PERIOD_SETS = (INTERVALS, HALVES)


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    df: float
    p_value: float
    mean_estimate: float
    n: int
    level: float = 0.05

    @property
    def reject(self) -> bool:
        return self.p_value < self.level


@dataclass(frozen=True)
class FTestResult:
    statistic: float
    df1: int
    df2: int
    p_value: float
    restricted_rss: float
    unrestricted_rss: float

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level


class PeriodSlice(NamedTuple):
    period: Period
    series: TimeSeries

    @property
    def empty(self) -> bool:
        return len(self.series) == 0


@dataclass(frozen=True)
class DecouplingRow:
    period: Period
    result: TTestResult | None
    n: int
    note: str = ""

    @property
    def computable(self) -> bool:
        return self.result is not None


def mean_zero_ttest(s, level: float = 0.05) -> TTestResult:
    """One-sample two-sided t-test of ``mean == 0``."""
    v = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    n = v.size
    if n < 2:
        raise InsufficientData("t-test needs at least two observations")
    mean = math.fsum(v) / n
    dev = v - mean
    var = math.fsum(dev * dev) / (n - 1)
    if not var > 0.0:
        raise DegenerateSeries("t-test undefined for a zero-variance series")
    t = mean / math.sqrt(var / n)
    df = n - 1
    p = float(min(1.0, 2.0 * stats.t.sf(abs(t), df)))
    return TTestResult(float(t), float(df), p, float(mean), int(n), level)


def split_by_periods(s: TimeSeries, periods: Iterable[Period]) -> list[PeriodSlice]:
    """Restrict ``s`` to each period (inclusive bounds)."""
    out = []
    for period in periods:
        sub = s.between(np.datetime64(period.start), np.datetime64(period.end))
        if len(sub) == 0:
            logger.warning("period %r contains no observations", period.label)
        out.append(PeriodSlice(period, sub))
    return out


def decoupling_table(
    dy: TimeSeries, dx: TimeSeries, periods: Iterable[Period], level: float = 0.05
) -> list[DecouplingRow]:
    """Per-period mean-zero t-test on the pointwise difference ``dy - dx``."""
    if not dy.aligned_with(dx):
        raise AlignmentError("decoupling inputs must share dates")
    diff = dy - dx
    rows = []
    for period, sub in split_by_periods(diff, periods):
        if len(sub) == 0:
            rows.append(DecouplingRow(period, None, 0, "NotComputable: no observations"))
            continue
        try:
            res = mean_zero_ttest(sub, level)
        except (DegenerateSeries, InsufficientData) as exc:
            rows.append(DecouplingRow(period, None, len(sub), f"NotComputable: {exc}"))
            continue
        rows.append(DecouplingRow(period, res, len(sub)))
    return rows


def decoupling_result(rows: Sequence[DecouplingRow], label: str) -> TTestResult:
    """The t-test of one labelled row; raises NotComputable if it has none."""
    for row in rows:
        if row.period.label == label:
            if row.result is None:
                raise NotComputable(row.note)
            return row.result
    raise KeyError(label)


def nested_f_test(
    restricted: RegressionFit, unrestricted: RegressionFit, df1: int | None = None
) -> FTestResult:
    """F-test of a restricted linear model against an unrestricted one."""
    if df1 is None:
        df1 = unrestricted.k - restricted.k
    if df1 < 1:
        raise ValueError("restricted model must drop at least one coefficient")
    df2 = unrestricted.n - unrestricted.k
    if df2 < 1:
        raise InsufficientData("no residual degrees of freedom")
    num = max(restricted.rss - unrestricted.rss, 0.0) / df1
    den = unrestricted.rss / df2
    if den == 0.0:
        f = math.inf if num > 0 else 0.0
    else:
        f = num / den
    p = float(stats.f.sf(f, df1, df2)) if math.isfinite(f) else 0.0
    return FTestResult(float(f), int(df1), int(df2), p, restricted.rss, unrestricted.rss)


def _values(s):
    return s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)


def _check_pair(a, b):
    if isinstance(a, TimeSeries) and isinstance(b, TimeSeries) and not a.aligned_with(b):
        raise AlignmentError(f"{a.name!r} and {b.name!r} have different dates")
    va, vb = _values(a), _values(b)
    if va.size != vb.size:
        raise AlignmentError("series lengths differ")
    return va, vb


def leading_indicator_ftest(target, leader, p: int = 10) -> FTestResult:
    """Joint significance of ``p`` lags of ``leader`` in a regression of ``target``.

    The first ``p`` observations are dropped, leaving ``n - p`` rows; the
    restricted model has only an intercept.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    y, x = _check_pair(target, leader)
    n = y.size
    if n <= 2 * p + 2:
        raise InsufficientData(f"{n} observations are too few for {p} lags")
    response = y[p:]
    ones = np.ones((n - p, 1))
    unrestricted = ols(response, np.hstack([ones, lag_matrix(x, p)]))
    restricted = ols(response, ones)
    return nested_f_test(restricted, unrestricted)


def _granger_one(cause: np.ndarray, effect: np.ndarray, p: int) -> FTestResult:
    n = effect.size
    response = effect[p:]
    ones = np.ones((n - p, 1))
    own = lag_matrix(effect, p)
    restricted = ols(response, np.hstack([ones, own]))
    unrestricted = ols(response, np.hstack([ones, own, lag_matrix(cause, p)]))
    return nested_f_test(restricted, unrestricted)


def granger(a, b, p: int) -> tuple[FTestResult, FTestResult]:
    """Bidirectional Granger tests: ``(a -> b, b -> a)``."""
    if p < 1:
        raise ValueError("p must be at least 1")
    va, vb = _check_pair(a, b)
    if va.size <= 3 * p + 2:
        raise InsufficientData(f"{va.size} observations are too few for {p} lags")
    return _granger_one(va, vb, p), _granger_one(vb, va, p)

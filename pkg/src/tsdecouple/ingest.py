"""Reading quote-provider CSV files and aligning two index series."""

from __future__ import annotations

import csv
import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DuplicateDate, NoOverlap, ParseError, SchemaError, UnsortedDates
from .series_core import TimeSeries

__all__ = ["RawSeries", "CleaningLog", "AlignedPair", "parse_quote_csv", "align_and_clean"]

MISSING_TOKENS = frozenset({"", "null", "NULL", "Null", "NaN", "nan", "NA"})


@dataclass(frozen=True)
class RawSeries:
    dates: np.ndarray  # datetime64[D]
    values: np.ndarray  # float, NaN where missing
    source_path: str
    column_used: str

    def __len__(self):
        return int(self.dates.size)

    @property
    def missing(self) -> int:
        return int(np.isnan(self.values).sum())

    @property
    def name(self) -> str:
        return Path(self.source_path).stem

    def dropna(self, name: str | None = None) -> TimeSeries:
        keep = ~np.isnan(self.values)
        return TimeSeries(self.dates[keep], self.values[keep], name or self.name)


@dataclass(frozen=True)
class CleaningLog:
    rows_in: int
    rows_dropped: int
    rows_out: int
    reasons: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rows_in - self.rows_dropped != self.rows_out:
            raise AssertionError("cleaning log does not balance")
        if sum(self.reasons.values()) != self.rows_dropped:
            raise AssertionError("drop reasons do not sum to rows dropped")

    def to_dict(self) -> dict:
        return {
            "rows_in": self.rows_in,
            "rows_dropped": self.rows_dropped,
            "rows_out": self.rows_out,
            "reasons": dict(sorted(self.reasons.items())),
        }


class AlignedPair(NamedTuple):
    a: TimeSeries
    b: TimeSeries
    log: CleaningLog


def _parse_value(text: str, row: int, column: str) -> float:
    text = text.strip()
    if text in MISSING_TOKENS:
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"non-numeric {column!r} value {text!r}", row) from None


def parse_quote_csv(path, value_column: str = "Adj Close") -> RawSeries:
    """Read the ``Date`` column and one value column of a quote CSV.

    Missing cells (empty or ``null``) become NaN. Row numbers in errors are
    1-based file lines, the header being line 1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        if "Date" not in header:
            raise SchemaError(f"{path} has no 'Date' column")
        if value_column not in header:
            raise SchemaError(f"{path} has no {value_column!r} column (found {header})")
        di = header.index("Date")
        vi = header.index(value_column)
        dates: list[_dt.date] = []
        values: list[float] = []
        for line, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) <= max(di, vi):
                raise ParseError(f"expected {len(header)} fields, got {len(rec)}", line)
            try:
                day = _dt.date.fromisoformat(rec[di].strip())
            except ValueError:
                raise ParseError(f"unparseable date {rec[di]!r}", line) from None
            if dates:
                if day == dates[-1]:
                    raise DuplicateDate(f"row {line}: duplicate date {day}")
                if day < dates[-1]:
                    raise UnsortedDates(f"date {day} precedes {dates[-1]}", line)
            dates.append(day)
            values.append(_parse_value(rec[vi], line, value_column))
    return RawSeries(
        np.array(dates, dtype="datetime64[D]"),
        np.array(values, dtype=float),
        str(path),
        value_column,
    )


def align_and_clean(a: RawSeries, b: RawSeries, names=("a", "b")) -> AlignedPair:
    """Inner-join on dates and drop dates where either value is missing."""
    union = np.union1d(a.dates, b.dates)
    common, ia, ib = np.intersect1d(a.dates, b.dates, return_indices=True)
    if common.size == 0:
        raise NoOverlap(f"{a.source_path} and {b.source_path} share no dates")
    va = a.values[ia]
    vb = b.values[ib]
    miss_a = np.isnan(va)
    miss_b = np.isnan(vb)
    keep = ~(miss_a | miss_b)
    reasons = {}
    only_a = int(np.setdiff1d(a.dates, b.dates).size)
    only_b = int(np.setdiff1d(b.dates, a.dates).size)
    for key, count in (
        (f"date only in {names[0]}", only_a),
        (f"date only in {names[1]}", only_b),
        (f"missing in {names[0]} only", int((miss_a & ~miss_b).sum())),
        (f"missing in {names[1]} only", int((miss_b & ~miss_a).sum())),
        ("missing in both", int((miss_a & miss_b).sum())),
    ):
        if count:
            reasons[key] = count
    rows_out = int(keep.sum())
    if rows_out == 0:
        raise NoOverlap("no date has values in both series")
    log = CleaningLog(int(union.size), int(union.size) - rows_out, rows_out, reasons)
    return AlignedPair(
        TimeSeries(common[keep], va[keep], names[0]),
        TimeSeries(common[keep], vb[keep], names[1]),
        log,
    )

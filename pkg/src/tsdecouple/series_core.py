"""Date-indexed series container and the elementary transforms built on it.

Every transform here is a pure function returning a new :class:`TimeSeries`;
the trading-day position is the clock, so calendar gaps are never filled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import AlignmentError, InsufficientData, InvalidPrice

__all__ = [
    "TimeSeries",
    "SummaryStats",
    "VolatilitySpec",
    "difference",
    "cumulative_sum",
    "simple_returns",
    "rolling_volatility",
    "summarize",
]


def _as_dates(dates) -> np.ndarray:
    arr = np.asarray(dates)
    if arr.dtype.kind != "M":
        arr = arr.astype("datetime64[D]")
    return arr.astype("datetime64[D]")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Equally spaced (in trading days) real-valued observations.

    Parameters
    ----------
    dates : array_like of datetime64[D] or ISO strings
        Strictly increasing observation dates.
    values : array_like of float
        Finite observations, one per date.
    name : str
        Label carried into reports.
    """

    dates: np.ndarray
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.ndim != 1 or values.ndim != 1:
            raise ValueError("dates and values must be one-dimensional")
        if dates.shape != values.shape:
            raise ValueError(
                f"dates ({dates.size}) and values ({values.size}) differ in length"
            )
        if dates.size > 1 and not np.all(dates[1:] > dates[:-1]):
            raise ValueError("dates must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite; drop missing values first")
        dates = dates.copy()
        values = values.copy()
        dates.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, name="", start="2000-01-03"):
        """Build a series on a consecutive daily calendar (for synthetic data)."""
        values = np.asarray(values, dtype=float)
        dates = np.datetime64(start, "D") + np.arange(values.size)
        return cls(dates, values, name)

    def __len__(self):
        return int(self.values.size)

    def __repr__(self):
        if len(self) == 0:
            return f"TimeSeries(name={self.name!r}, empty)"
        return (
            f"TimeSeries(name={self.name!r}, n={len(self)}, "
            f"{self.dates[0]}..{self.dates[-1]})"
        )

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.name == other.name
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def rename(self, name: str) -> "TimeSeries":
        return TimeSeries(self.dates, self.values, name)

    def between(self, start, end) -> "TimeSeries":
        """Observations with ``start <= date <= end``."""
        start = np.datetime64(start, "D")
        end = np.datetime64(end, "D")
        mask = (self.dates >= start) & (self.dates <= end)
        return TimeSeries(self.dates[mask], self.values[mask], self.name)

    def aligned_with(self, other: "TimeSeries") -> bool:
        return np.array_equal(self.dates, other.dates)

    def __sub__(self, other: "TimeSeries") -> "TimeSeries":
        if not self.aligned_with(other):
            raise AlignmentError(f"{self.name!r} and {other.name!r} are not aligned")
        return TimeSeries(
            self.dates, self.values - other.values, f"{self.name}-{other.name}"
        )


@dataclass(frozen=True)
class SummaryStats:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float
    sd: float
    first_value: float
    last_value: float
    n: int

    def as_dict(self) -> dict:
        return {
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
            "mean": self.mean,
            "sd": self.sd,
            "first_value": self.first_value,
            "last_value": self.last_value,
            "n": self.n,
        }


@dataclass(frozen=True)
class VolatilitySpec:
    window: int = 100
    return_kind: str = "simple_percent"

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 2:
            raise ValueError(f"window must be an integer >= 2, got {self.window}")
        if self.return_kind != "simple_percent":
            raise ValueError(f"unsupported return kind {self.return_kind!r}")


def difference(s: TimeSeries, order: int = 1) -> TimeSeries:
    """Iterated first difference; the surviving (later) dates are kept."""
    if order < 1:
        raise ValueError("order must be positive")
    if len(s) <= order:
        raise InsufficientData(
            f"cannot difference {len(s)} observations {order} time(s)"
        )
    return TimeSeries(s.dates[order:], np.diff(s.values, n=order), s.name)


def cumulative_sum(s: TimeSeries) -> TimeSeries:
    """Running sum with an implicit zero before the first observation."""
    return TimeSeries(s.dates, np.cumsum(s.values), s.name)


def simple_returns(s: TimeSeries) -> TimeSeries:
    """Percent change ``100 * (s_t - s_{t-1}) / s_{t-1}``."""
    if len(s) < 2:
        raise InsufficientData("returns need at least two prices")
    if np.any(s.values <= 0):
        bad = int(np.argmax(s.values <= 0))
        raise InvalidPrice(f"nonpositive price {s.values[bad]} at {s.dates[bad]}")
    v = s.values
    return TimeSeries(s.dates[1:], 100.0 * (v[1:] / v[:-1] - 1.0), s.name)


def rolling_volatility(s: TimeSeries, spec: VolatilitySpec | int) -> TimeSeries:
    """Rolling sample standard deviation of simple percent returns.

    The value dated ``t`` uses the ``window`` returns ending at ``t``, so the
    first ``window`` prices produce no output and the result has
    ``len(s) - window`` points.
    """
    if not isinstance(spec, VolatilitySpec):
        spec = VolatilitySpec(int(spec))
    w = spec.window
    if len(s) <= w:
        raise InsufficientData(
            f"series of length {len(s)} too short for a {w}-day window"
        )
    r = simple_returns(s).values
    windows = sliding_window_view(r, w)
    centered = windows - windows.mean(axis=1, keepdims=True)
    sd = np.sqrt(np.einsum("ij,ij->i", centered, centered) / (w - 1))
    return TimeSeries(s.dates[w:], sd, s.name)


def summarize(s: TimeSeries | Sequence[float]) -> SummaryStats:
    """Five-number summary (type-7 quartiles), mean, sample sd, endpoints."""
    v = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    if v.size == 0:
        raise InsufficientData("cannot summarize an empty series")
    q = np.percentile(v, [0, 25, 50, 75, 100])
    sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return SummaryStats(
        min=float(q[0]),
        q1=float(q[1]),
        median=float(q[2]),
        q3=float(q[3]),
        max=float(q[4]),
        mean=float(np.mean(v)),
        sd=sd,
        first_value=float(v[0]),
        last_value=float(v[-1]),
        n=int(v.size),
    )

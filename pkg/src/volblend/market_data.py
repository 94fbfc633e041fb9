"""Price ingestion, log returns, descriptive statistics, and chronological splits."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .exceptions import DataError


@dataclass(frozen=True)
class PriceSeries:
    """Daily closing prices on an ordered trading calendar.

    Dates are strictly increasing, closes strictly positive, length >= 2.
    """

    dates: tuple[dt.date, ...]
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != closes.shape[0]:
            raise DataError("dates and closes must have equal length")
        if closes.shape[0] < 2:
            raise DataError("price series needs at least 2 observations")
        if not np.all(np.isfinite(closes)) or np.any(closes <= 0):
            raise DataError("closes must be finite and strictly positive")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise DataError(f"dates must be strictly increasing, got {prev} then {cur}")

    def __len__(self) -> int:
        return self.closes.shape[0]


@dataclass(frozen=True)
class ReturnSeries:
    """Daily log returns; date t labels the return from t-1 to t."""

    dates: tuple[dt.date, ...]
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != returns.shape[0]:
            raise DataError("dates and returns must have equal length")
        if returns.shape[0] < 1:
            raise DataError("return series is empty")
        if not np.all(np.isfinite(returns)):
            raise DataError("returns contain non-finite values")

    def __len__(self) -> int:
        return self.returns.shape[0]


@dataclass(frozen=True)
class SplitSpec:
    """Contiguous train/validation/test partition lengths."""

    train_len: int
    val_len: int = 252
    test_len: int = 252

    def __post_init__(self):
        for field in ("train_len", "val_len", "test_len"):
            value = getattr(self, field)
            if not isinstance(value, int) or value <= 0:
                raise DataError(f"{field} must be a positive integer, got {value!r}")

    @property
    def total(self) -> int:
        return self.train_len + self.val_len + self.test_len

    @property
    def insample_len(self) -> int:
        """Train plus validation: the in-sample window."""
        return self.train_len + self.val_len


@dataclass(frozen=True)
class DescriptiveStats:
    """Sample moments of a return series (kurtosis reported as excess)."""

    observations: int
    mean: float
    std_dev: float
    median: float
    kurtosis: float
    skewness: float
    maximum: float
    minimum: float

    def to_dict(self) -> dict:
        return {
            "observations": self.observations,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "median": self.median,
            "kurtosis": self.kurtosis,
            "skewness": self.skewness,
            "maximum": self.maximum,
            "minimum": self.minimum,
        }


def load_prices(path) -> PriceSeries:
    """Load a close-price CSV with `date` (ISO-8601) and `close` columns.

    Extra columns are ignored, rows are sorted by date, and duplicate dates,
    malformed rows, or non-positive prices raise DataError.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"price file not found: {path}")
    rows: list[tuple[dt.date, float]] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, no header row")
        lookup = {name.strip().lower(): name for name in reader.fieldnames}
        for required in ("date", "close"):
            if required not in lookup:
                raise DataError(f"{path}: missing required column '{required}'")
        date_col, close_col = lookup["date"], lookup["close"]
        for lineno, row in enumerate(reader, start=2):
            raw_date = (row.get(date_col) or "").strip()
            raw_close = (row.get(close_col) or "").strip()
            try:
                parsed_date = dt.date.fromisoformat(raw_date)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad date {raw_date!r}") from exc
            try:
                close = float(raw_close)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad close {raw_close!r}") from exc
            if not np.isfinite(close) or close <= 0:
                raise DataError(f"{path}:{lineno}: close must be positive, got {close}")
            rows.append((parsed_date, close))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda item: item[0])
    for (d1, _), (d2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DataError(f"{path}: duplicate date {d1}")
    dates = tuple(d for d, _ in rows)
    closes = np.array([c for _, c in rows], dtype=float)
    return PriceSeries(dates=dates, closes=closes)


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """Log returns r_t = ln(P_t / P_{t-1}); output is one shorter than the input."""
    if len(prices) < 2:
        raise DataError("need at least 2 prices to compute returns")
    values = np.diff(np.log(prices.closes))
    return ReturnSeries(dates=prices.dates[1:], returns=values)


def describe(series: ReturnSeries) -> DescriptiveStats:
    """Sample moments; kurtosis is excess (normal -> 0), std uses ddof=1."""
    r = series.returns
    if r.shape[0] < 4:
        raise DataError("describe needs at least 4 observations")
    return DescriptiveStats(
        observations=int(r.shape[0]),
        mean=float(np.mean(r)),
        std_dev=float(np.std(r, ddof=1)),
        median=float(np.median(r)),
        kurtosis=float(sps.kurtosis(r, fisher=True, bias=True)),
        skewness=float(sps.skew(r, bias=True)),
        maximum=float(np.max(r)),
        minimum=float(np.min(r)),
    )


def split(series: ReturnSeries, spec: SplitSpec) -> tuple[ReturnSeries, ReturnSeries, ReturnSeries]:
    """Chronological partition into (train, validation, test)."""
    if spec.total != len(series):
        raise DataError(
            f"split lengths sum to {spec.total} but series has {len(series)} observations"
        )
    a, b = spec.train_len, spec.train_len + spec.val_len
    train = ReturnSeries(series.dates[:a], series.returns[:a])
    val = ReturnSeries(series.dates[a:b], series.returns[a:b])
    test = ReturnSeries(series.dates[b:], series.returns[b:])
    return train, val, test


def synthetic_dates(n: int, start: dt.date = dt.date(2000, 1, 3)) -> tuple[dt.date, ...]:
    """Consecutive weekdays, for simulated series that need a calendar."""
    out = []
    current = start
    while len(out) < n:
        if current.weekday() < 5:
            out.append(current)
        current += dt.timedelta(days=1)
    return tuple(out)

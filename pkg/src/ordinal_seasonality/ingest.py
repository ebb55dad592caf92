"""Loading and preparing return series: CSV input, log returns, subperiod
splits, shuffled surrogates, and calendar week partitioning."""

from __future__ import annotations

import csv
import gzip
import io
import math
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, OrderError, RejectedRowError, SchemaError


@dataclass
class ReturnSeries:
    """Ordered daily values (returns or prices), optionally date-stamped."""

    values: np.ndarray
    dates: tuple[date, ...] | None = None
    label: str = ""

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise InvalidInputError("series must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("series contains non-finite values")
        self.values = values
        if self.dates is not None:
            dates = tuple(self.dates)
            if len(dates) != values.size:
                raise InvalidInputError("dates and values must have the same length")
            for prev, cur in zip(dates, dates[1:]):
                if cur <= prev:
                    raise OrderError(f"dates not strictly increasing at {cur}")
            self.dates = dates

    def __len__(self) -> int:
        return int(self.values.size)


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8", newline="")


def _parse_date(text: str, row: int, date_format: str | None) -> date:
    text = text.strip()
    try:
        if date_format:
            return datetime.strptime(text, date_format).date()
        return date.fromisoformat(text)
    except ValueError as exc:
        raise SchemaError(f"row {row}: unparseable date {text!r}") from exc


def load_csv(
    path,
    date_column: str | None = None,
    price_column: str | None = None,
    return_column: str | None = None,
    delimiter: str = ",",
    date_format: str | None = None,
    label: str | None = None,
) -> ReturnSeries:
    """Load a value column (and optionally a date column) from a CSV file.

    Exactly one of ``price_column`` and ``return_column`` selects the value
    column; the loader does not convert prices to returns, use
    :func:`log_returns` for that.  A ``.gz`` suffix selects transparent
    gzip decompression.  Rows that fail to parse raise :class:`SchemaError`
    naming the 1-based data row.
    """
    if (price_column is None) == (return_column is None):
        raise SchemaError("exactly one of price_column and return_column is required")
    value_column = price_column if price_column is not None else return_column

    path = Path(path)
    values: list[float] = []
    dates: list[date] = []
    with _open_text(path) as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        columns = {name: idx for idx, name in enumerate(header)}
        for needed in filter(None, (date_column, value_column)):
            if needed not in columns:
                raise SchemaError(f"{path}: missing column {needed!r} (header: {header})")
        vcol = columns[value_column]
        dcol = columns[date_column] if date_column else None

        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= vcol or (dcol is not None and len(row) <= dcol):
                raise SchemaError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
            cell = row[vcol].strip()
            try:
                value = float(cell)
            except ValueError:
                raise SchemaError(f"row {row_no}: unparseable value {cell!r}") from None
            if not math.isfinite(value):
                raise SchemaError(f"row {row_no}: non-finite value {cell!r}")
            values.append(value)
            if dcol is not None:
                dates.append(_parse_date(row[dcol], row_no, date_format))

    if not values:
        raise InvalidInputError(f"{path}: no data rows")
    return ReturnSeries(
        values=np.asarray(values, dtype=float),
        dates=tuple(dates) if date_column else None,
        label=label if label is not None else path.name,
    )


def log_returns(prices: ReturnSeries) -> ReturnSeries:
    """Log returns r_t = ln(P_t / P_{t-1}); dates shift to the later day."""
    if len(prices) < 2:
        raise InvalidInputError("need at least two prices")
    if (prices.values <= 0).any():
        raise InvalidInputError("prices must be strictly positive")
    values = np.diff(np.log(prices.values))
    dates = prices.dates[1:] if prices.dates is not None else None
    return ReturnSeries(values=values, dates=dates, label=prices.label)


@dataclass(frozen=True)
class SubperiodSpec:
    """Contiguous, exhaustive partition of a series into consecutive slices."""

    lengths: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.lengths:
            raise InvalidInputError("subperiod spec needs at least one length")
        if any(int(n) < 1 for n in self.lengths):
            raise InvalidInputError("subperiod lengths must be positive")
        object.__setattr__(self, "lengths", tuple(int(n) for n in self.lengths))

    @property
    def count(self) -> int:
        return len(self.lengths)

    @property
    def total(self) -> int:
        return sum(self.lengths)


def split_subperiods(series: ReturnSeries, spec: SubperiodSpec) -> list[ReturnSeries]:
    """Slice the series into the spec's consecutive subperiods."""
    if spec.total != len(series):
        raise InvalidInputError(
            f"subperiod lengths sum to {spec.total}, series has {len(series)} points"
        )
    out = []
    start = 0
    for i, n in enumerate(spec.lengths, start=1):
        stop = start + n
        dates = series.dates[start:stop] if series.dates is not None else None
        base = series.label or "series"
        out.append(ReturnSeries(values=series.values[start:stop], dates=dates, label=f"{base}[{i}]"))
        start = stop
    return out


def shuffle_series(series: ReturnSeries, seed: int) -> ReturnSeries:
    """Uniform random permutation of the values; dates are dropped."""
    if len(series) < 2:
        raise InvalidInputError("need at least two values to shuffle")
    rng = np.random.default_rng(seed)
    values = series.values[rng.permutation(len(series))]
    base = series.label or "series"
    return ReturnSeries(values=values, dates=None, label=f"{base} (shuffled)")


@dataclass
class WeekWindows:
    """Monday-to-Friday windows extracted from a dated series."""

    windows: np.ndarray  # (n, 5)
    skipped_weeks: int


def calendar_weeks(series: ReturnSeries) -> WeekWindows:
    """Group a dated weekday series into complete Monday..Friday ISO weeks.

    Weeks missing any weekday (holidays, series edges) are skipped and
    counted.  Weekend dates are structural errors: daily equity series are
    weekday-only.
    """
    if series.dates is None:
        raise InvalidInputError("calendar week partitioning requires dates")
    for row, d in enumerate(series.dates, start=1):
        if d.isoweekday() > 5:
            raise RejectedRowError(f"row {row}: weekend date {d.isoformat()}")

    windows: list[np.ndarray] = []
    skipped = 0
    group_key = None
    group_idx: list[int] = []

    def flush() -> None:
        nonlocal skipped
        if not group_idx:
            return
        weekdays = [series.dates[i].isoweekday() for i in group_idx]
        if weekdays == [1, 2, 3, 4, 5]:
            windows.append(series.values[group_idx])
        else:
            skipped += 1

    for i, d in enumerate(series.dates):
        key = d.isocalendar()[:2]
        if key != group_key:
            flush()
            group_key = key
            group_idx = []
        group_idx.append(i)
    flush()

    stacked = np.asarray(windows, dtype=float) if windows else np.empty((0, 5), dtype=float)
    return WeekWindows(windows=stacked, skipped_weeks=skipped)

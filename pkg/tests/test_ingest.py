import gzip
import math
from datetime import date, timedelta

import numpy as np
import pytest

from ordinal_seasonality.errors import (
    InvalidInputError,
    OrderError,
    RejectedRowError,
    SchemaError,
)
from ordinal_seasonality.ingest import (
    ReturnSeries,
    SubperiodSpec,
    calendar_weeks,
    load_csv,
    log_returns,
    shuffle_series,
    split_subperiods,
)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# load_csv
# ---------------------------------------------------------------------------


def test_load_price_csv(tmp_path):
    path = _write(
        tmp_path,
        "prices.csv",
        "date,close\n"
        "2020-01-06,100\n2020-01-07,101\n2020-01-08,99\n"
        "2020-01-09,102\n2020-01-10,103\n2020-01-13,104\n",
    )
    series = load_csv(path, date_column="date", price_column="close")
    assert len(series) == 6
    assert series.dates is not None and series.dates[0] == date(2020, 1, 6)
    returns = log_returns(series)
    assert len(returns) == 5
    assert returns.dates[0] == date(2020, 1, 7)


def test_load_blank_value_names_row(tmp_path):
    path = _write(
        tmp_path, "gap.csv", "date,close\n2020-01-06,100\n2020-01-07,101\n2020-01-08,\n"
    )
    with pytest.raises(SchemaError, match="row 3"):
        load_csv(path, date_column="date", price_column="close")


def test_load_missing_column(tmp_path):
    path = _write(tmp_path, "cols.csv", "date,open\n2020-01-06,1\n")
    with pytest.raises(SchemaError, match="close"):
        load_csv(path, date_column="date", price_column="close")


def test_load_non_monotone_dates(tmp_path):
    path = _write(
        tmp_path, "dates.csv", "date,ret\n2020-01-07,0.1\n2020-01-06,0.2\n"
    )
    with pytest.raises(OrderError):
        load_csv(path, date_column="date", return_column="ret")


def test_load_empty_file(tmp_path):
    path = _write(tmp_path, "empty.csv", "date,ret\n")
    with pytest.raises(InvalidInputError):
        load_csv(path, date_column="date", return_column="ret")


def test_load_requires_exactly_one_value_column(tmp_path):
    path = _write(tmp_path, "both.csv", "ret,close\n0.1,100\n")
    with pytest.raises(SchemaError):
        load_csv(path, return_column="ret", price_column="close")
    with pytest.raises(SchemaError):
        load_csv(path)


def test_load_gzip_and_delimiter(tmp_path):
    path = tmp_path / "data.csv.gz"
    with gzip.open(path, "wt", encoding="utf-8") as handle:
        handle.write("ret;x\n0.01;a\n-0.02;b\n")
    series = load_csv(path, return_column="ret", delimiter=";")
    assert np.allclose(series.values, [0.01, -0.02])


def test_load_rejects_nan_cell(tmp_path):
    path = _write(tmp_path, "nan.csv", "ret\n0.1\nnan\n")
    with pytest.raises(SchemaError, match="row 2"):
        load_csv(path, return_column="ret")


# ---------------------------------------------------------------------------
# log returns
# ---------------------------------------------------------------------------


def test_log_returns_values():
    series = ReturnSeries(values=np.array([100.0, 100.0]))
    assert log_returns(series).values.tolist() == [0.0]

    series = ReturnSeries(values=np.array([100.0, 110.0]))
    assert log_returns(series).values[0] == pytest.approx(0.09531017980432493, abs=1e-12)

    series = ReturnSeries(values=np.array([100.0, 90.0, 99.0]))
    out = log_returns(series).values
    assert out[0] == pytest.approx(-0.10536051565782628, abs=1e-12)
    assert out[1] == pytest.approx(0.09531017980432493, abs=1e-12)


def test_log_returns_rejects_nonpositive():
    with pytest.raises(InvalidInputError):
        log_returns(ReturnSeries(values=np.array([100.0, -1.0])))


def test_log_returns_reconstruction():
    rng = np.random.default_rng(3)
    prices = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.01, size=500)))
    returns = log_returns(ReturnSeries(values=prices))
    rebuilt = prices[0] * np.exp(np.cumsum(returns.values))
    assert np.allclose(rebuilt, prices[1:], rtol=1e-12)


def test_price_file_loses_one_row_to_differencing(tmp_path):
    rng = np.random.default_rng(6)
    lines = ["close"] + [f"{p:.6f}" for p in 100 + np.cumsum(rng.normal(0, 0.5, 13_550))]
    path = _write(tmp_path, "big.csv", "\n".join(lines) + "\n")
    prices = load_csv(path, price_column="close")
    assert len(prices) == 13_550
    assert len(log_returns(prices)) == 13_549


# ---------------------------------------------------------------------------
# subperiods
# ---------------------------------------------------------------------------


def test_split_paper_shaped_subperiods():
    series = ReturnSeries(values=np.arange(13550, dtype=float))
    parts = split_subperiods(series, SubperiodSpec((3050, 3050, 3050, 3050, 1350)))
    assert [len(p) for p in parts] == [3050, 3050, 3050, 3050, 1350]
    assert np.array_equal(np.concatenate([p.values for p in parts]), series.values)


def test_split_mismatch():
    series = ReturnSeries(values=np.arange(10, dtype=float))
    with pytest.raises(InvalidInputError):
        split_subperiods(series, SubperiodSpec((3, 3)))


def test_split_identity():
    series = ReturnSeries(values=np.arange(7, dtype=float), label="x")
    (only,) = split_subperiods(series, SubperiodSpec((7,)))
    assert np.array_equal(only.values, series.values)


def test_split_preserves_dates():
    start = date(2020, 1, 6)
    dates = tuple(start + timedelta(days=i) for i in range(10))
    series = ReturnSeries(values=np.arange(10, dtype=float), dates=dates)
    parts = split_subperiods(series, SubperiodSpec((4, 6)))
    assert parts[0].dates == dates[:4]
    assert parts[1].dates == dates[4:]


# ---------------------------------------------------------------------------
# shuffle
# ---------------------------------------------------------------------------


def test_shuffle_preserves_multiset_and_length():
    rng = np.random.default_rng(11)
    series = ReturnSeries(values=rng.standard_normal(501))
    shuffled = shuffle_series(series, seed=7)
    assert len(shuffled) == len(series)
    assert np.array_equal(np.sort(shuffled.values), np.sort(series.values))
    assert shuffled.dates is None


def test_shuffle_deterministic_per_seed():
    series = ReturnSeries(values=np.arange(100, dtype=float))
    a = shuffle_series(series, seed=1).values
    b = shuffle_series(series, seed=1).values
    c = shuffle_series(series, seed=2).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# ---------------------------------------------------------------------------
# calendar weeks
# ---------------------------------------------------------------------------


def _weekday_dates(start: date, n: int) -> list[date]:
    out = []
    day = start
    while len(out) < n:
        if day.isoweekday() <= 5:
            out.append(day)
        day += timedelta(days=1)
    return out


def test_calendar_weeks_two_full_weeks():
    dates = _weekday_dates(date(2020, 1, 6), 10)  # Monday start
    series = ReturnSeries(values=np.arange(10, dtype=float), dates=tuple(dates))
    grouped = calendar_weeks(series)
    assert grouped.windows.shape == (2, 5)
    assert grouped.skipped_weeks == 0
    assert np.array_equal(grouped.windows[0], np.arange(5))


def test_calendar_weeks_holiday_skips_week():
    dates = _weekday_dates(date(2020, 1, 6), 10)
    dates.pop(2)  # Wednesday holiday in week one
    series = ReturnSeries(values=np.arange(9, dtype=float), dates=tuple(dates))
    grouped = calendar_weeks(series)
    assert grouped.windows.shape == (1, 5)
    assert grouped.skipped_weeks == 1


def test_calendar_weeks_rejects_weekends():
    dates = (date(2020, 1, 6), date(2020, 1, 11))  # Saturday
    series = ReturnSeries(values=np.array([0.1, 0.2]), dates=dates)
    with pytest.raises(RejectedRowError):
        calendar_weeks(series)


def test_calendar_weeks_requires_dates():
    with pytest.raises(InvalidInputError):
        calendar_weeks(ReturnSeries(values=np.arange(10, dtype=float)))


def test_calendar_weeks_emits_monday_to_friday_only():
    dates = _weekday_dates(date(2021, 3, 1), 40)
    series = ReturnSeries(values=np.arange(40, dtype=float), dates=tuple(dates))
    grouped = calendar_weeks(series)
    for window in grouped.windows:
        idx = [int(v) for v in window]
        weekdays = [dates[i].isoweekday() for i in idx]
        assert weekdays == [1, 2, 3, 4, 5]


# ---------------------------------------------------------------------------
# ReturnSeries invariants
# ---------------------------------------------------------------------------


def test_series_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        ReturnSeries(values=np.array([1.0, math.inf]))


def test_series_rejects_unsorted_dates():
    with pytest.raises(OrderError):
        ReturnSeries(
            values=np.array([1.0, 2.0]),
            dates=(date(2020, 1, 7), date(2020, 1, 6)),
        )

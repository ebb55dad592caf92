import json
import re
import subprocess
import sys

import numpy as np
import pytest

import ordinal_seasonality.cli as cli
from ordinal_seasonality.fixtures import nyse_fixture_distribution, series_from_distribution


def run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "ordinal_seasonality", *args],
        capture_output=True,
        text=True,
        **kwargs,
    )


@pytest.fixture(scope="module")
def returns_csv(tmp_path_factory):
    rng = np.random.default_rng(8)
    path = tmp_path_factory.mktemp("data") / "returns.csv"
    lines = ["date,ret"]
    day = np.datetime64("2015-01-05")
    written = 0
    while written < 600:
        weekday = (day.astype("datetime64[D]").view("int64") + 3) % 7
        if weekday < 5:
            lines.append(f"{day},{rng.standard_normal() * 0.01:.8f}")
            written += 1
        day += 1
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def fixture_csv(tmp_path_factory):
    series = series_from_distribution(nyse_fixture_distribution())
    path = tmp_path_factory.mktemp("fixture") / "nyse.csv"
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("ret\n")
        for value in series.values:
            handle.write(f"{float(value)!r}\n")
    return path


# ---------------------------------------------------------------------------
# patterns command
# ---------------------------------------------------------------------------


def test_patterns_default_csv_row_counts():
    out = run_cli("patterns", "--d", "3")
    assert out.returncode == 0
    assert len(out.stdout.strip().splitlines()) == 6

    out = run_cli("patterns", "--d", "5")
    assert len(out.stdout.strip().splitlines()) == 120


def test_patterns_family_filters():
    out = run_cli("patterns", "--d", "5", "--family", "monday-worst-friday-best")
    ids = [int(line.split(",")[0]) for line in out.stdout.strip().splitlines()]
    assert ids == [1, 3, 7, 9, 13, 15]

    out = run_cli("patterns", "--d", "5", "--family", "monday-largest")
    assert len(out.stdout.strip().splitlines()) == 24


def test_patterns_json_format():
    out = run_cli("patterns", "--d", "3", "--format", "json")
    doc = json.loads(out.stdout)
    assert [p["id"] for p in doc["patterns"]] == [1, 2, 3, 4, 5, 6]


# ---------------------------------------------------------------------------
# analyze command
# ---------------------------------------------------------------------------


def test_analyze_json(returns_csv):
    out = run_cli(
        "analyze", "--input", str(returns_csv), "--column", "ret", "--weeks", "block"
    )
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    section = doc["sections"][0]
    assert section["weeks"] == 120
    assert len(section["pattern_counts"]) == 120
    assert len(section["position_matrix"]["rows"]) == 5
    assert "h4_monday_largest" in section["tests"]


def test_analyze_calendar_mode(returns_csv):
    out = run_cli(
        "analyze",
        "--input", str(returns_csv),
        "--column", "ret",
        "--date-column", "date",
        "--weeks", "calendar",
    )
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    section = doc["sections"][0]
    assert section["skipped_weeks"] == 0
    assert section["weeks"] == 120


def test_analyze_subperiod_sections(fixture_csv):
    out = run_cli(
        "analyze",
        "--input", str(fixture_csv),
        "--column", "ret",
        "--subperiods", "3050,3050,3050,3050,1350",
    )
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert len(doc["sections"]) == 5
    assert [s["points"] for s in doc["sections"]] == [3050, 3050, 3050, 3050, 1350]


def test_analyze_csv_format_carries_same_numbers(fixture_csv):
    json_out = run_cli("analyze", "--input", str(fixture_csv), "--column", "ret")
    csv_out = run_cli(
        "analyze", "--input", str(fixture_csv), "--column", "ret", "--format", "csv"
    )
    assert csv_out.returncode == 0
    doc = json.loads(json_out.stdout)
    q_mo = doc["sections"][0]["position_matrix"]["rows"][0]["statistic"]
    lines = dict(
        line.split(",", 1) for line in csv_out.stdout.strip().splitlines()[1:]
    )
    assert float(lines["sections[0].position_matrix.rows[0].statistic"]) == q_mo
    assert lines["sections[0].position_matrix.rows[0].counts[0]"] == "637"


def test_analyze_missing_file_exits_2(tmp_path):
    out = run_cli("analyze", "--input", str(tmp_path / "absent.csv"), "--column", "r")
    assert out.returncode == 2
    assert "error" in out.stderr.lower()


def test_analyze_needs_exactly_one_value_column(returns_csv):
    out = run_cli("analyze", "--input", str(returns_csv))
    assert out.returncode == 2


def test_analyze_hurst_flag(fixture_csv):
    out = run_cli(
        "analyze", "--input", str(fixture_csv), "--column", "ret", "--hurst",
        "--method", "dfa",
    )
    doc = json.loads(out.stdout)
    assert "hurst" in doc["sections"][0]
    assert doc["sections"][0]["hurst"]["method"] == "dfa"


# ---------------------------------------------------------------------------
# simulate command
# ---------------------------------------------------------------------------


def test_simulate_deterministic_bytes():
    args = ("simulate", "--hurst", "0.5", "--length", "1000", "--reps", "6", "--seed", "9")
    first = run_cli(*args)
    second = run_cli(*args)
    assert first.returncode == 0
    assert first.stdout == second.stdout


def test_simulate_requires_seed():
    out = run_cli("simulate", "--hurst", "0.5", "--length", "1000", "--reps", "4")
    assert out.returncode == 2


def test_simulate_rejects_bad_hurst():
    out = run_cli(
        "simulate", "--hurst", "1.5", "--length", "1000", "--reps", "4", "--seed", "1"
    )
    assert out.returncode == 2


def test_simulate_row_shape():
    out = run_cli(
        "simulate", "--hurst", "0.4,0.6", "--length", "1500", "--reps", "5",
        "--seed", "3", "--jobs", "2",
    )
    doc = json.loads(out.stdout)
    assert [row["hurst"] for row in doc["rows"]] == [0.4, 0.6]
    row = doc["rows"][0]
    assert row["weeks"] == 300
    assert set(row["h1"]["rejections"]) == {"at_10", "at_05", "at_01"}
    assert len(row["h2"]) == 5


# ---------------------------------------------------------------------------
# shuffle command
# ---------------------------------------------------------------------------


def test_shuffle_reports_aggregate_and_rows(returns_csv):
    out = run_cli(
        "shuffle", "--input", str(returns_csv), "--column", "ret",
        "--reps", "8", "--seed", "5",
    )
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["config"]["replications"] == 8
    assert len(doc["per_replication"]) == 8
    assert 0 <= doc["aggregate"]["h1"]["rejections"]["at_05"] <= 8
    # same seed -> identical bytes
    again = run_cli(
        "shuffle", "--input", str(returns_csv), "--column", "ret",
        "--reps", "8", "--seed", "5",
    )
    assert again.stdout == out.stdout


def test_shuffle_requires_seed(returns_csv):
    out = run_cli("shuffle", "--input", str(returns_csv), "--column", "ret", "--reps", "4")
    assert out.returncode == 2


# ---------------------------------------------------------------------------
# hurst command
# ---------------------------------------------------------------------------


def test_hurst_command(fixture_csv):
    out = run_cli("hurst", "--input", str(fixture_csv), "--column", "ret")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert 0.0 < doc["estimate"]["h"] < 1.0
    assert doc["estimate"]["method"] == "rs"


# ---------------------------------------------------------------------------
# serialization invariants
# ---------------------------------------------------------------------------


def test_json_round_trip(returns_csv):
    out = run_cli("analyze", "--input", str(returns_csv), "--column", "ret")
    doc = json.loads(out.stdout)
    assert json.loads(cli.dumps(doc)) == doc


_FLOAT_TOKEN = re.compile(r"-?\d+\.\d+(?:[eE][+-]?\d+)?")


def test_every_float_has_five_decimals(returns_csv):
    out = run_cli("analyze", "--input", str(returns_csv), "--column", "ret")
    for token in _FLOAT_TOKEN.findall(out.stdout):
        if "e" in token or "E" in token:
            continue
        assert len(token.split(".")[1]) >= 5, token


def test_format_float_padding():
    assert cli.format_float(0.5) == "0.50000"
    assert cli.format_float(22.78967) == "22.78967"
    assert float(cli.format_float(1 / 3)) == 1 / 3


def test_exit_codes_for_error_classes(monkeypatch, returns_csv, capsys):
    # input problems exit 2
    assert cli.main(["analyze", "--input", "/nonexistent.csv", "--column", "ret"]) == 2
    capsys.readouterr()

    # unexpected internal failures exit 1
    def boom(path, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(cli, "load_csv", boom)
    assert cli.main(["analyze", "--input", str(returns_csv), "--column", "ret"]) == 1
    capsys.readouterr()
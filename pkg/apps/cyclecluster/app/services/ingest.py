# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Trip and weather CSV ingestion, column cleaning and the daily join"""

import datetime as dt
import logging
from collections import Counter
from collections.abc import Iterable
from pathlib import Path

import numpy as np
import pandas as pd
import pydantic

from common.columns import canonical_headers, canonical_order
from models import (
    CORE_WEATHER_FEATURES,
    PERCENT_COLUMNS,
    DailyRecord,
    DroppedColumn,
    JoinBreakdown,
    TripColumns,
    WeatherColumns,
    WeatherRow,
)

from ..core.errors import IngestError

logger = logging.getLogger(__name__)

DEFAULT_EXCLUDED = ("conditions", "address", "location")


def _read_raw(path: str | Path) -> pd.DataFrame:
    """Read a CSV as strings. Empty cells stay empty strings."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError as e:
        raise IngestError(f"file not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise IngestError(f"{path}: file is empty") from e
    except pd.errors.ParserError as e:
        raise IngestError(f"{path}: malformed row: {e}") from e

    # With keep_default_na=False only fields absent from a short row are NaN
    bad = _first_bad(frame.isna().any(axis=1))
    if bad is not None:
        raise IngestError(f"{path}: line {_line(bad)}: malformed row: expected {len(frame.columns)} fields")
    return frame


def _line(index: int) -> int:
    # Header is line 1
    return int(index) + 2


def _first_bad(mask: pd.Series) -> int | None:
    hits = np.flatnonzero(mask.to_numpy())
    return int(mask.index[hits[0]]) if len(hits) else None


# ---------------------------------------------------------------------------
# Trips
# ---------------------------------------------------------------------------


def count_trips(
    trip_csv: str | Path, min_duration: int = 60, columns: TripColumns | None = None
) -> tuple[dict[dt.date, int], int]:
    """Count qualifying trips per start date.

    Returns the per-date counts and the number of false starts removed
    (trips shorter than `min_duration` seconds).
    """
    columns = columns or TripColumns()
    frame = _read_raw(trip_csv)

    for required in (columns.start_time, columns.duration):
        if required not in frame.columns:
            raise IngestError(f"{trip_csv}: missing column '{required}'")

    if frame.empty:
        return {}, 0

    raw_start = frame[columns.start_time]
    raw_duration = frame[columns.duration]

    starts = pd.to_datetime(raw_start, format=columns.timestamp_format, errors="coerce")
    bad = _first_bad(starts.isna())
    if bad is not None:
        raise IngestError(
            f"{trip_csv}: line {_line(bad)}: unparseable timestamp '{raw_start[bad]}' "
            f"(expected format {columns.timestamp_format})"
        )

    durations = pd.to_numeric(raw_duration, errors="coerce")
    invalid = durations.isna() | (durations < 0) | (durations != np.floor(durations))
    bad = _first_bad(invalid)
    if bad is not None:
        raise IngestError(
            f"{trip_csv}: line {_line(bad)}: duration must be a non-negative integer, got '{raw_duration[bad]}'"
        )

    qualifying = durations >= min_duration
    false_starts = int((~qualifying).sum())
    per_day = starts[qualifying].dt.date.value_counts().sort_index()
    counts = {day: int(n) for day, n in per_day.items()}

    logger.info(f"Parsed {len(frame)} trips from {trip_csv}: {len(counts)} days, {false_starts} false starts removed")
    return counts, false_starts


def parse_trips(trip_csv: str | Path, min_duration: int = 60, columns: TripColumns | None = None) -> dict[dt.date, int]:
    """Per-date count of trips lasting at least `min_duration` seconds.

    Dates with zero qualifying trips are absent from the map.
    """
    counts, _ = count_trips(trip_csv, min_duration, columns)
    return counts


def parse_trip_files(
    paths: Iterable[str | Path], min_duration: int = 60, columns: TripColumns | None = None
) -> tuple[dict[dt.date, int], int]:
    """Sum per-date counts over several trip files (e.g. monthly archives)"""
    total: Counter[dt.date] = Counter()
    false_starts = 0
    for path in paths:
        counts, removed = count_trips(path, min_duration, columns)
        total.update(counts)
        false_starts += removed
    return dict(sorted(total.items())), false_starts


# ---------------------------------------------------------------------------
# Weather
# ---------------------------------------------------------------------------


def parse_weather(weather_csv: str | Path, columns: WeatherColumns | None = None) -> list[WeatherRow]:
    """Parse a daily weather CSV into rows keyed by date.

    Empty cells are missing values. Columns listed in `columns.text_columns`
    are kept as nominal labels; every other column must be numeric.
    """
    columns = columns or WeatherColumns()
    frame = _read_raw(weather_csv)

    try:
        mapping = canonical_headers(list(frame.columns), columns.aliases)
    except ValueError as e:
        raise IngestError(f"{weather_csv}: {e}") from e
    frame = frame.rename(columns=mapping)
    source = {name: header for header, name in mapping.items()}

    if "date" not in frame.columns:
        raise IngestError(f"{weather_csv}: missing column '{columns.aliases.get('date', 'date')}'")

    dates = pd.to_datetime(frame["date"], format=columns.date_format, errors="coerce")
    bad = _first_bad(dates.isna())
    if bad is not None:
        raise IngestError(f"{weather_csv}: line {_line(bad)}: unparseable date '{frame['date'][bad]}'")

    duplicated = dates.duplicated(keep="first")
    bad = _first_bad(duplicated)
    if bad is not None:
        raise IngestError(f"{weather_csv}: line {_line(bad)}: duplicate date {dates[bad].date().isoformat()}")

    numeric: dict[str, pd.Series] = {}
    labels: dict[str, pd.Series] = {}
    for name in frame.columns:
        if name == "date":
            continue
        cells = frame[name].str.strip()
        if name in columns.text_columns:
            labels[name] = cells
            continue
        values = pd.to_numeric(cells.where(cells != "", np.nan), errors="coerce")
        bad = _first_bad(values.isna() & (cells != ""))
        if bad is not None:
            raise IngestError(
                f"{weather_csv}: line {_line(bad)}, column '{source[name]}': non-numeric value '{cells[bad]}'"
            )
        if name in PERCENT_COLUMNS:
            bad = _first_bad((values < 0) | (values > 100))
            if bad is not None:
                raise IngestError(
                    f"{weather_csv}: line {_line(bad)}, column '{source[name]}': "
                    f"percentage {cells[bad]} outside [0, 100]"
                )
        numeric[name] = values

    rows = []
    for i in frame.index:
        rows.append(
            WeatherRow(
                date=dates[i].date(),
                values={name: (None if pd.isna(s[i]) else float(s[i])) for name, s in numeric.items()},
                labels={name: (s[i] or None) for name, s in labels.items()},
            )
        )

    logger.info(f"Parsed {len(rows)} weather rows from {weather_csv} ({len(numeric)} numeric columns)")
    return rows


def _column_names(rows: list[WeatherRow]) -> list[str]:
    return list(dict.fromkeys(name for row in rows for name in row.columns))


def _without(rows: list[WeatherRow], names: set[str]) -> list[WeatherRow]:
    return [
        WeatherRow(
            date=row.date,
            values={k: v for k, v in row.values.items() if k not in names},
            labels={k: v for k, v in row.labels.items() if k not in names},
        )
        for row in rows
    ]


def drop_sparse_columns(
    rows: list[WeatherRow], threshold: float = 0.5
) -> tuple[list[WeatherRow], list[DroppedColumn]]:
    """Remove columns whose missing fraction exceeds `threshold`"""
    if not 0 < threshold <= 1:
        raise IngestError(f"sparse threshold must lie in (0, 1], got {threshold}")
    if not rows:
        return rows, []

    n = len(rows)
    dropped = []
    for name in _column_names(rows):
        missing = sum(1 for row in rows if {**row.values, **row.labels}.get(name) is None)
        fraction = missing / n
        if fraction > threshold:
            dropped.append(DroppedColumn(name=name, missing_fraction=fraction))
            logger.info(f"Dropping sparse column '{name}' ({missing}/{n} missing)")

    return _without(rows, {d.name for d in dropped}), dropped


def exclude_columns(
    rows: list[WeatherRow], names: Iterable[str] = DEFAULT_EXCLUDED
) -> tuple[list[WeatherRow], list[str]]:
    """Remove named columns. Names not present only produce a warning."""
    present = set(_column_names(rows))
    excluded = []
    for name in names:
        if name in present:
            excluded.append(name)
        else:
            logger.warning(f"Excluded column '{name}' is not present in the weather data")
    return _without(rows, set(excluded)), excluded


# ---------------------------------------------------------------------------
# Join
# ---------------------------------------------------------------------------


def join_daily(counts: dict[dt.date, int], weather: list[WeatherRow]) -> tuple[list[DailyRecord], JoinBreakdown]:
    """Inner-join trip counts and weather on date.

    A day is kept only if it has a count and every retained numeric weather
    value. Returns the records sorted by date and a breakdown of the days
    that were excluded.
    """
    numeric_columns = list(dict.fromkeys(name for row in weather for name in row.values))
    for feature in CORE_WEATHER_FEATURES:
        if feature not in numeric_columns:
            raise IngestError(f"required weather feature '{feature}' is not available after cleaning")

    leftover_labels = {name for row in weather for name in row.labels}
    if leftover_labels:
        logger.info(f"Nominal columns {sorted(leftover_labels)} are not clustering features and are ignored")

    extras = canonical_order([c for c in numeric_columns if c not in CORE_WEATHER_FEATURES])
    weather_by_date = {row.date: row for row in weather}

    breakdown = JoinBreakdown(
        missing_count=len(weather_by_date.keys() - counts.keys()),
        missing_weather=len(counts.keys() - weather_by_date.keys()),
    )

    records = []
    for day in sorted(weather_by_date.keys() & counts.keys()):
        values = weather_by_date[day].values
        if any(values.get(name) is None for name in numeric_columns):
            breakdown.incomplete_weather += 1
            continue
        try:
            records.append(
                DailyRecord(
                    date=day,
                    count=counts[day],
                    **{name: values[name] for name in CORE_WEATHER_FEATURES},
                    extras={name: values[name] for name in extras},
                )
            )
        except pydantic.ValidationError as e:
            raise IngestError(f"invalid daily record for {day.isoformat()}: {e}") from e

    if not records:
        raise IngestError(
            "no days left after joining trips and weather "
            f"({breakdown.missing_count} without trips, {breakdown.missing_weather} without weather, "
            f"{breakdown.incomplete_weather} with incomplete weather)"
        )

    dropped = breakdown.missing_count + breakdown.missing_weather + breakdown.incomplete_weather
    logger.info(f"Joined {len(records)} daily records, {dropped} dates excluded")
    return records, breakdown


# ---------------------------------------------------------------------------
# Daily table serialization
# ---------------------------------------------------------------------------


def records_to_frame(records: list[DailyRecord]) -> pd.DataFrame:
    """Daily table with one column per feature, dates as ISO strings"""
    extras = canonical_order({name for r in records for name in r.extras})
    rows = [
        {
            "date": r.date.isoformat(),
            "count": r.count,
            **{name: getattr(r, name) for name in CORE_WEATHER_FEATURES},
            **{name: r.extras[name] for name in extras},
        }
        for r in records
    ]
    return pd.DataFrame(rows, columns=["date", "count", *CORE_WEATHER_FEATURES, *extras])


def records_from_frame(frame: pd.DataFrame) -> list[DailyRecord]:
    """Inverse of records_to_frame"""
    missing = [c for c in ("date", "count", *CORE_WEATHER_FEATURES) if c not in frame.columns]
    if missing:
        raise IngestError(f"daily table is missing columns {missing}")
    extras = [c for c in frame.columns if c not in ("date", "count", *CORE_WEATHER_FEATURES)]
    records = []
    for row in frame.to_dict(orient="records"):
        records.append(
            DailyRecord(
                date=dt.date.fromisoformat(str(row["date"])),
                count=int(row["count"]),
                **{name: float(row[name]) for name in CORE_WEATHER_FEATURES},
                extras={name: float(row[name]) for name in extras},
            )
        )
    return records

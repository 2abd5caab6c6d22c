# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Tests for trip/weather parsing, column cleaning and the daily join"""

import datetime as dt
import logging

import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.errors import IngestError
from app.services.ingest import (
    count_trips,
    drop_sparse_columns,
    exclude_columns,
    join_daily,
    parse_trip_files,
    parse_trips,
    parse_weather,
    records_from_frame,
    records_to_frame,
)
from models import WeatherRow

TRIP_HEADER = "Duration,Start date,End date,Start station number,Bike number,Member type\n"
WEATHER_HEADER = (
    "Date time,Temperature,Maximum Temperature,Minimum Temperature,Precipitation,"
    "Wind Speed,Cloud Cover,Relative Humidity,Conditions\n"
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def weather_line(day, temp="70.0", precip="0.0", cloud="40.0", humidity="60.0"):
    return f"2018-07-{day:02d},{temp},80.0,60.0,{precip},8.0,{cloud},{humidity},Clear\n"


def row(day, **values):
    return WeatherRow(date=dt.date(2018, 7, day), values=values)


CORE = {"temperature": 70.0, "precipitation": 0.0, "wind_speed": 8.0, "cloud_cover": 40.0, "relative_humidity": 60.0}


class TestParseTrips:
    """Trip CSV parsing and false-start removal"""

    def test_counts_per_start_date(self, tmp_path):
        """Trips are counted on their start date; false starts are removed"""
        path = write(
            tmp_path,
            "trips.csv",
            TRIP_HEADER
            + "300,2018-07-01 08:00:00,2018-07-01 08:05:00,1,W1,Member\n"
            + "59,2018-07-01 09:00:00,2018-07-01 09:01:00,1,W2,Casual\n"
            + "60,2018-07-01 23:59:30,2018-07-02 00:00:30,1,W3,Member\n"
            + "900,2018-07-02 10:00:00,2018-07-02 10:15:00,2,W4,Member\n",
        )
        counts, false_starts = count_trips(path)
        assert counts == {dt.date(2018, 7, 1): 2, dt.date(2018, 7, 2): 1}
        assert false_starts == 1

    def test_day_with_only_false_starts_is_absent(self, tmp_path):
        """A date whose trips are all false starts has no entry"""
        path = write(tmp_path, "trips.csv", TRIP_HEADER + "10,2018-07-03 08:00:00,x,1,W1,Member\n")
        assert parse_trips(path) == {}

    def test_min_duration_is_configurable(self, tmp_path):
        """Raising the threshold removes more trips"""
        path = write(tmp_path, "trips.csv", TRIP_HEADER + "120,2018-07-03 08:00:00,x,1,W1,Member\n")
        assert parse_trips(path, min_duration=60) == {dt.date(2018, 7, 3): 1}
        assert parse_trips(path, min_duration=121) == {}

    def test_malformed_row_names_line(self, tmp_path):
        """A row with too many fields is an error naming its line"""
        path = write(
            tmp_path,
            "trips.csv",
            TRIP_HEADER + "300,2018-07-01 08:00:00,x,1,W1,Member\n" + "300,2018-07-01 08:00:00,x,1,W1,Member,extra\n",
        )
        with pytest.raises(IngestError, match="line 3"):
            parse_trips(path)

    def test_short_row_names_line(self, tmp_path):
        """A row with fewer fields than the header is an error naming its line"""
        path = write(
            tmp_path,
            "trips.csv",
            "Duration,Start date,End date,Bike\n300,2018-07-01 08:00:00\n300,2018-07-01 09:00:00,x,W1\n",
        )
        with pytest.raises(IngestError, match="line 2: malformed row: expected 4 fields"):
            parse_trips(path)

    def test_unparseable_timestamp_names_line(self, tmp_path):
        """Timestamps not matching the configured format are rejected"""
        path = write(
            tmp_path,
            "trips.csv",
            TRIP_HEADER + "300,2018-07-01 08:00:00,x,1,W1,Member\n" + "300,07/01/2018 8am,x,1,W1,Member\n",
        )
        with pytest.raises(IngestError, match="line 3.*timestamp"):
            parse_trips(path)

    def test_missing_column(self, tmp_path):
        """A file without the start-time column is rejected"""
        path = write(tmp_path, "trips.csv", "Duration,Station\n300,1\n")
        with pytest.raises(IngestError, match="Start date"):
            parse_trips(path)

    @pytest.mark.parametrize("duration", ["-5", "12.5", "abc", ""])
    def test_invalid_duration(self, tmp_path, duration):
        """Durations must be non-negative integers"""
        path = write(tmp_path, "trips.csv", TRIP_HEADER + f"{duration},2018-07-01 08:00:00,x,1,W1,Member\n")
        with pytest.raises(IngestError, match="line 2.*duration"):
            parse_trips(path)

    def test_missing_file(self, tmp_path):
        """A missing file is an ingest error, not an OSError"""
        with pytest.raises(IngestError, match="not found"):
            parse_trips(tmp_path / "nope.csv")

    def test_header_only_file(self, tmp_path):
        """A file without rows yields no counts"""
        path = write(tmp_path, "trips.csv", TRIP_HEADER)
        assert parse_trips(path) == {}

    @settings(max_examples=25, deadline=None)
    @given(st.permutations(list(range(12))))
    def test_row_order_does_not_matter(self, tmp_path_factory, order):
        """Counts are invariant under permutation of the input rows"""
        lines = [f"{100 + i * 37},2018-07-{1 + i % 4:02d} {8 + i % 10:02d}:00:00,x,1,W{i},Member\n" for i in range(12)]
        base = tmp_path_factory.mktemp("perm")
        original = write(base, "a.csv", TRIP_HEADER + "".join(lines))
        shuffled = write(base, "b.csv", TRIP_HEADER + "".join(lines[i] for i in order))
        assert parse_trips(original) == parse_trips(shuffled)

    def test_files_are_summed(self, fixtures_dir):
        """Counts from several files add up per date"""
        counts, false_starts = parse_trip_files(
            [fixtures_dir / "trips_2018-07_a.csv", fixtures_dir / "trips_2018-07_b.csv"]
        )
        assert false_starts == 7
        assert dt.date(2018, 7, 15) not in counts
        assert counts[dt.date(2018, 7, 3)] == 6
        assert counts[dt.date(2018, 7, 31)] == 4


class TestParseWeather:
    """Weather CSV parsing"""

    def test_headers_are_canonicalized(self, tmp_path):
        """Aliased and snake-cased headers become canonical column names"""
        path = write(tmp_path, "w.csv", WEATHER_HEADER + weather_line(1))
        (parsed,) = parse_weather(path)
        assert parsed.date == dt.date(2018, 7, 1)
        assert parsed.values == {
            "temperature": 70.0,
            "max_temperature": 80.0,
            "min_temperature": 60.0,
            "precipitation": 0.0,
            "wind_speed": 8.0,
            "cloud_cover": 40.0,
            "relative_humidity": 60.0,
        }
        assert parsed.labels == {"conditions": "Clear"}

    def test_empty_cell_is_missing(self, tmp_path):
        """Empty numeric cells parse to None"""
        path = write(tmp_path, "w.csv", WEATHER_HEADER + weather_line(1, precip=""))
        assert parse_weather(path)[0].values["precipitation"] is None

    def test_duplicate_date(self, tmp_path):
        """Two rows for one date are rejected"""
        path = write(tmp_path, "w.csv", WEATHER_HEADER + weather_line(1) + weather_line(1))
        with pytest.raises(IngestError, match="line 3: duplicate date 2018-07-01"):
            parse_weather(path)

    def test_non_numeric_cell_is_named(self, tmp_path):
        """The error names the line and source column of a bad cell"""
        path = write(tmp_path, "w.csv", WEATHER_HEADER + weather_line(1) + weather_line(2, temp="warm"))
        with pytest.raises(IngestError, match="line 3, column 'Temperature'.*'warm'"):
            parse_weather(path)

    @pytest.mark.parametrize(("cloud", "humidity"), [("101.0", "60.0"), ("40.0", "-1.0")])
    def test_percent_out_of_range(self, tmp_path, cloud, humidity):
        """Percentages outside [0, 100] are rejected"""
        path = write(tmp_path, "w.csv", WEATHER_HEADER + weather_line(1, cloud=cloud, humidity=humidity))
        with pytest.raises(IngestError, match="outside \\[0, 100\\]"):
            parse_weather(path)

    def test_short_row_names_line(self, tmp_path):
        """A truncated weather row is rejected rather than read as missing values"""
        path = write(tmp_path, "w.csv", WEATHER_HEADER + weather_line(1) + "2018-07-02,71.0,81.0\n")
        with pytest.raises(IngestError, match="line 3: malformed row"):
            parse_weather(path)

    def test_missing_date_column(self, tmp_path):
        """A weather file needs a date column"""
        path = write(tmp_path, "w.csv", "Temperature\n70\n")
        with pytest.raises(IngestError, match="Date time"):
            parse_weather(path)


class TestColumnCleaning:
    """Sparse-column dropping and explicit exclusion"""

    def rows(self):
        return [
            row(1, a=1.0, b=None, c=None),
            row(2, a=2.0, b=1.0, c=None),
            row(3, a=None, b=1.0, c=None),
            row(4, a=4.0, b=None, c=1.0),
        ]

    def test_exact_fractions_reported(self):
        """Columns missing on more than the threshold are dropped with their fraction"""
        kept, dropped = drop_sparse_columns(self.rows(), threshold=0.5)
        assert [(d.name, d.missing_fraction) for d in dropped] == [("c", 0.75)]
        assert set(kept[0].values) == {"a", "b"}

    def test_fraction_equal_to_threshold_is_kept(self):
        """Exactly threshold-missing columns survive"""
        _, dropped = drop_sparse_columns(self.rows(), threshold=0.5)
        assert "b" not in {d.name for d in dropped}

    @pytest.mark.parametrize("threshold", [0.0, -0.1, 1.5])
    def test_invalid_threshold(self, threshold):
        """Threshold must lie in (0, 1]"""
        with pytest.raises(IngestError, match="threshold"):
            drop_sparse_columns(self.rows(), threshold)

    @given(st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=0.01, max_value=1.0))
    def test_threshold_monotonicity(self, t1, t2):
        """A lower threshold never drops fewer columns"""
        low, high = sorted((t1, t2))
        _, dropped_low = drop_sparse_columns(self.rows(), low)
        _, dropped_high = drop_sparse_columns(self.rows(), high)
        assert {d.name for d in dropped_high} <= {d.name for d in dropped_low}

    def test_exclude_warns_for_absent_names(self, caplog):
        """Excluding a column that does not exist only warns"""
        rows = [WeatherRow(date=dt.date(2018, 7, 1), values={"a": 1.0}, labels={"conditions": "Clear"})]
        with caplog.at_level(logging.WARNING):
            kept, excluded = exclude_columns(rows, ["conditions", "address"])
        assert excluded == ["conditions"]
        assert kept[0].labels == {}
        assert "'address' is not present" in caplog.text


class TestJoinDaily:
    """Inner join of counts and weather"""

    def test_breakdown_and_order(self):
        """Excluded dates are counted by reason and records come out sorted"""
        counts = {dt.date(2018, 7, 3): 10, dt.date(2018, 7, 1): 5, dt.date(2018, 7, 9): 2, dt.date(2018, 7, 2): 4}
        weather = [
            row(3, **CORE),
            row(1, **CORE),
            row(2, **{**CORE, "precipitation": None}),
            row(4, **CORE),
        ]
        records, breakdown = join_daily(counts, weather)
        assert [r.date.day for r in records] == [1, 3]
        assert [r.count for r in records] == [5, 10]
        assert breakdown.missing_count == 1
        assert breakdown.missing_weather == 1
        assert breakdown.incomplete_weather == 1
        assert len(records) <= min(len(counts), len(weather))

    def test_extras_are_carried(self):
        """Other numeric columns land in extras"""
        records, _ = join_daily({dt.date(2018, 7, 1): 3}, [row(1, **CORE, max_temperature=80.0)])
        assert records[0].extras == {"max_temperature": 80.0}

    def test_empty_result(self):
        """No overlapping dates is an error"""
        with pytest.raises(IngestError, match="no days left"):
            join_daily({dt.date(2018, 8, 1): 3}, [row(1, **CORE)])

    def test_required_feature_dropped(self):
        """Cleaning away a core feature is reported by name"""
        values = {k: v for k, v in CORE.items() if k != "wind_speed"}
        with pytest.raises(IngestError, match="wind_speed"):
            join_daily({dt.date(2018, 7, 1): 3}, [row(1, **values)])

    def test_table_round_trip(self, tmp_path):
        """Writing and re-reading the daily table is the identity"""
        records, _ = join_daily(
            {dt.date(2018, 7, 1): 3, dt.date(2018, 7, 2): 8},
            [row(1, **{**CORE, "temperature": 0.1 + 0.2}, max_temperature=80.5), row(2, **CORE, max_temperature=1 / 3)],
        )
        path = tmp_path / "daily.csv"
        records_to_frame(records).to_csv(path, index=False)
        again = records_from_frame(pd.read_csv(path, float_precision="round_trip", dtype={"date": str}))
        assert again == records

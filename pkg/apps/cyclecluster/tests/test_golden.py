# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Golden-file tests for the ingest stage on the 30-day July 2018 fixture"""

import pytest

from app.pipeline import execute_stage
from app.stages.context import CLEANING_REPORT, DAILY, FEATURES, PREPROCESS, StageContext
from common.artifacts import dumps


@pytest.fixture
def ingested(july_config):
    """Output store after running the ingest stage once"""
    ctx = StageContext.from_config(july_config, workers=1)
    execute_stage("ingest", ctx)
    return ctx


class TestIngestGolden:
    """Ingest artifacts match the checked-in goldens byte for byte"""

    @pytest.mark.parametrize("name", [CLEANING_REPORT, PREPROCESS])
    def test_json_artifact(self, ingested, fixtures_dir, name):
        """JSON artifacts without their run metadata equal the golden bytes"""
        expected = (fixtures_dir / "golden" / name).read_bytes()
        assert dumps(ingested.store.read_json(name)) == expected

    @pytest.mark.parametrize("name", [DAILY, FEATURES])
    def test_csv_artifact(self, ingested, fixtures_dir, name):
        """CSV artifacts equal the golden bytes"""
        expected = (fixtures_dir / "golden" / name).read_bytes()
        assert ingested.store.path(name).read_bytes() == expected

    def test_cleaning_report(self, ingested):
        """Dropped columns, join breakdown and false starts"""
        report = ingested.store.read_json(CLEANING_REPORT)
        assert report["records"] == 28
        assert [c["name"] for c in report["dropped_columns"]] == ["wind_gust", "snow_depth"]
        assert report["rows_dropped_in_join"] == sum(report["join_breakdown"].values()) == 3

    def test_edge_days(self, ingested):
        """The 60-second trip counts; day 15, day 20 and day 31 are gone"""
        daily = ingested.store.read_csv(DAILY, dtype={"date": str}).set_index("date")
        assert daily.loc["2018-07-03", "count"] == 6
        assert "2018-07-15" not in daily.index
        assert "2018-07-20" not in daily.index
        assert "2018-07-31" not in daily.index
        assert daily["count"].sum() == sum(3 + d % 5 for d in range(1, 31) if d not in (15, 20))

    def test_feature_table(self, ingested):
        """One temperature column survives and every column is standardized"""
        params = ingested.store.read_json(PREPROCESS)
        features = ingested.store.read_csv(FEATURES, dtype={"date": str})
        temps = {"temperature", "max_temperature", "min_temperature"}
        assert len(temps & set(params["features"])) == 1
        assert list(features.columns) == ["date", *params["features"]]
        for name in params["features"]:
            assert features[name].mean() == pytest.approx(0.0, abs=1e-9)
            assert features[name].std(ddof=1) == pytest.approx(1.0)

    def test_manifest(self, ingested):
        """Every artifact written is listed with its digest"""
        manifest = ingested.store.read_manifest()
        assert set(manifest) == {CLEANING_REPORT, DAILY, "correlation.csv", PREPROCESS, FEATURES}
        assert all(len(digest) == 64 for digest in manifest.values())

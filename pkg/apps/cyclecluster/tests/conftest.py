# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""
Pytest configuration and fixtures for cyclecluster tests.

Provides the 30-day July 2018 ingestion fixture, synthetic feature matrices
and helpers for building daily records.
"""

import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from app.config import load_pipeline_config, settings
from app.core import telemetry
from app.services.preprocess import FeatureMatrix
from models import DailyRecord, KMeansConfig

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def _no_telemetry(monkeypatch):
    """Keep tests off any globally configured meter provider."""
    monkeypatch.setattr(settings, "otel_sdk_disabled", True)
    telemetry.reset_metrics()
    yield
    telemetry.reset_metrics()


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory holding CSV fixtures and golden files."""
    return FIXTURES


@pytest.fixture
def july_config(tmp_path):
    """Pipeline config for the 30-day fixture, writing into a temp directory."""
    return load_pipeline_config(FIXTURES / "july_2018.yaml", {"out": str(tmp_path / "out")})


@pytest.fixture
def four_points() -> FeatureMatrix:
    """(0,0), (0,1), (10,10), (10,11): optimal 2-clustering has WSS 1."""
    return FeatureMatrix(
        feature_names=["x", "y"],
        rows=np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]]),
        dates=[dt.date(2018, 1, d) for d in range(1, 5)],
        standardized=True,
    )


@pytest.fixture
def blobs() -> np.ndarray:
    """Three well-separated Gaussian blobs, n = 300, d = 5, unit spread."""
    rng = np.random.default_rng(1234)
    centers = np.array(
        [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [20.0, 0.0, 0.0, 0.0, 0.0],
            [10.0, 17.320508, 0.0, 0.0, 0.0],
        ]
    )
    return np.vstack([c + rng.normal(size=(100, 5)) for c in centers])


@pytest.fixture
def fast_kmeans() -> KMeansConfig:
    """Fewer restarts for tests that cluster many times."""
    return KMeansConfig(k=1, n_configurations=5, seed=42)


def make_record(day: dt.date, count: int, **weather) -> DailyRecord:
    """DailyRecord with mild default weather."""
    values = {
        "temperature": 65.0,
        "precipitation": 0.0,
        "wind_speed": 8.0,
        "cloud_cover": 40.0,
        "relative_humidity": 60.0,
    }
    extras = weather.pop("extras", {})
    values.update(weather)
    return DailyRecord(date=day, count=count, extras=extras, **values)


@pytest.fixture
def record_factory():
    """Factory building DailyRecords with default weather."""
    return make_record

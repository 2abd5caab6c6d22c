# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""
Pydantic models for cyclecluster inputs, configuration and emitted artifacts.
"""

import datetime as dt
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

CORE_WEATHER_FEATURES = ("temperature", "precipitation", "wind_speed", "cloud_cover", "relative_humidity")
PERCENT_COLUMNS = ("cloud_cover", "relative_humidity")
SEASON_ORDER = ("winter", "spring", "summer", "autumn")


class ArtifactMeta(BaseModel):
    """Reproducibility stamp embedded in every JSON artifact"""

    tool: str = "cyclecluster"
    version: str
    seed: int
    config_digest: str


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


class TripColumns(BaseModel):
    """Header names of the trip CSV"""

    start_time: str = Field(default="Start date", description="Trip start timestamp column")
    duration: str = Field(default="Duration", description="Trip duration column (integer seconds)")
    timestamp_format: str = Field(default="%Y-%m-%d %H:%M:%S", description="strptime format of start_time")


class WeatherColumns(BaseModel):
    """Header names of the weather CSV.

    `aliases` maps a canonical column to the source header. Headers without an
    alias are normalized to snake_case ("Wind Speed" -> "wind_speed").
    """

    aliases: dict[str, str] = Field(
        default_factory=lambda: {
            "date": "Date time",
            "max_temperature": "Maximum Temperature",
            "min_temperature": "Minimum Temperature",
        }
    )
    text_columns: list[str] = Field(default_factory=lambda: ["conditions", "address", "location"])
    date_format: str = "%Y-%m-%d"


class ColumnMapping(BaseModel):
    trips: TripColumns = Field(default_factory=TripColumns)
    weather: WeatherColumns = Field(default_factory=WeatherColumns)


class WeatherRow(BaseModel):
    """One weather observation. A value of None marks a missing cell."""

    model_config = ConfigDict(frozen=True)

    date: dt.date
    values: dict[str, float | None] = Field(default_factory=dict, description="Numeric columns")
    labels: dict[str, str | None] = Field(default_factory=dict, description="Nominal (text) columns")

    @property
    def columns(self) -> list[str]:
        return [*self.values, *self.labels]


class DailyRecord(BaseModel):
    """One calendar day: trip count plus retained weather features"""

    model_config = ConfigDict(frozen=True)

    date: dt.date
    count: int = Field(..., ge=0, description="Trips per day")
    temperature: float = Field(..., description="Average temperature, °F")
    precipitation: float = Field(..., ge=0, description="Precipitation, inches")
    wind_speed: float = Field(..., description="Average wind speed, mph")
    cloud_cover: float = Field(..., ge=0, le=100, description="Cloud cover, percent")
    relative_humidity: float = Field(..., ge=0, le=100, description="Relative humidity, percent")
    extras: dict[str, float] = Field(default_factory=dict, description="Other retained numeric weather columns")

    def value(self, feature: str) -> float:
        if feature in self.extras:
            return self.extras[feature]
        return float(getattr(self, feature))


class DroppedColumn(BaseModel):
    name: str
    missing_fraction: float


class JoinBreakdown(BaseModel):
    """Why dates present in one input did not reach the daily table"""

    missing_count: int = Field(0, description="Weather days without any qualifying trip")
    missing_weather: int = Field(0, description="Trip days without a weather row")
    incomplete_weather: int = Field(0, description="Days with a missing retained weather value")


class CleaningReport(BaseModel):
    dropped_columns: list[DroppedColumn] = Field(default_factory=list)
    excluded_columns: list[str] = Field(default_factory=list)
    rows_dropped_in_join: int = 0
    join_breakdown: JoinBreakdown = Field(default_factory=JoinBreakdown)
    false_starts: int = 0
    records: int = 0


# ---------------------------------------------------------------------------
# Clustering
# ---------------------------------------------------------------------------


class KMeansConfig(BaseModel):
    """Hartigan-Wong k-means settings"""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1, description="Number of clusters")
    max_iterations: int = Field(10, ge=1, description="Maximum full sweeps per pass")
    n_configurations: int = Field(25, ge=1, description="Random centroid configurations (restarts)")
    seed: int = Field(0, ge=0, lt=2**64, description="Master seed")
    tolerance: float = Field(0.0, ge=0.0, description="Minimum WSS improvement for a transfer")
    init: Literal["random", "kmeans++"] = "random"
    debug: bool = Field(False, description="Assert monotone WSS after every accepted move")
    workers: int = Field(1, ge=1, description="Process-pool size for independent passes")


class ClusterAssignment(BaseModel):
    date: dt.date
    cluster: int


class CentroidSet(BaseModel):
    original: list[list[float]]
    standardized: list[list[float]]


class ClusteringArtifact(BaseModel):
    """Serialized form of a clustering result"""

    k: int
    seed: int
    total_wss: float
    per_cluster_wss: list[float]
    iterations_used: int
    converged: bool
    restarts_discarded_for_empty_clusters: int
    best_configuration: int
    feature_names: list[str]
    centroids: CentroidSet
    assignments: list[ClusterAssignment]


class Recommendation(BaseModel):
    elbow: int | None = None
    silhouette: int | None = None
    gap: int | None = None


class ValidationReport(BaseModel):
    """Per-k validation curves and each method's recommended k"""

    ks: list[int]
    wss_curve: list[float]
    silhouette_curve: list[float | None]
    log_wk: list[float]
    expected_log_wk: list[float]
    gap_curve: list[float]
    gap_se: list[float]
    bootstrap_count: int
    gap_rule: Literal["one_se", "argmax"] = "one_se"
    recommended: Recommendation = Field(default_factory=Recommendation)
    seed: int
    k_range_capped: bool = False

    @property
    def k_range(self) -> tuple[int, int]:
        return self.ks[0], self.ks[-1]

    @model_validator(mode="after")
    def _curves_aligned(self):
        n = len(self.ks)
        for name in ("wss_curve", "silhouette_curve", "gap_curve", "gap_se"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries, expected {n}")
        return self


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------


class FeatureStats(BaseModel):
    min: float
    max: float
    mean: float
    median: float


class ClusterSummary(BaseModel):
    cluster_index: int
    size: int
    features: dict[str, FeatureStats]


class SeasonDefinition(BaseModel):
    """Month (1-12) to season name"""

    months: dict[int, str]

    @field_validator("months")
    @classmethod
    def _all_months(cls, months: dict[int, str]) -> dict[int, str]:
        missing = sorted(set(range(1, 13)) - set(months))
        extra = sorted(set(months) - set(range(1, 13)))
        if missing or extra:
            raise ValueError(f"season definition must map months 1-12 exactly (missing={missing}, invalid={extra})")
        return months

    @classmethod
    def meteorological(cls) -> "SeasonDefinition":
        names = {12: "winter", 1: "winter", 2: "winter", 3: "spring", 4: "spring", 5: "spring"}
        names |= {6: "summer", 7: "summer", 8: "summer", 9: "autumn", 10: "autumn", 11: "autumn"}
        return cls(months=names)

    def season_of(self, day: dt.date) -> str:
        return self.months[day.month]

    def ordered_names(self) -> list[str]:
        names = list(dict.fromkeys(self.months[m] for m in range(1, 13)))
        known = [s for s in SEASON_ORDER if s in names]
        return known + [s for s in names if s not in known]


class SeasonAverage(BaseModel):
    observations: int
    total_trips: int
    average_per_day: float
    average_display: int


class SeasonClusterStats(BaseModel):
    observations: int
    total_trips: int
    mean: float
    median: float


class CountStats(BaseModel):
    size: int
    mean: float | None = None
    median: float | None = None


class WorkdaySplit(BaseModel):
    working: CountStats
    nonworking: CountStats


class CalendarConfig(BaseModel):
    """Working-day calendar: weekend weekdays (Monday=0) and public holidays"""

    weekend_days: set[int] = Field(default_factory=lambda: {5, 6})
    holidays: list[dt.date] = Field(default_factory=list)

    @field_validator("weekend_days")
    @classmethod
    def _valid_weekdays(cls, days: set[int]) -> set[int]:
        if not days <= set(range(7)):
            raise ValueError(f"weekend days must be weekday numbers 0-6, got {sorted(days)}")
        return days

    @field_validator("holidays")
    @classmethod
    def _unique_holidays(cls, holidays: list[dt.date]) -> list[dt.date]:
        seen: set[dt.date] = set()
        for day in holidays:
            if day in seen:
                raise ValueError(f"duplicate holiday {day.isoformat()}")
            seen.add(day)
        return holidays

    def is_working_day(self, day: dt.date) -> bool:
        return day.weekday() not in self.weekend_days and day not in set(self.holidays)


class AnomalyFlag(BaseModel):
    date: dt.date
    cluster_index: int
    distance_to_centroid: float = Field(..., description="Standardized units")
    rank: int = Field(..., ge=1)
    note: str = ""


class AnalysisReport(BaseModel):
    clusters: list[ClusterSummary]
    seasons: dict[str, SeasonAverage]
    season_by_cluster: dict[str, dict[str, SeasonClusterStats]]
    workday: dict[str, WorkdaySplit]
    anomalies: list[AnomalyFlag]


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


class PipelineConfig(BaseModel):
    """Declarative pipeline configuration (YAML file plus CLI overrides)"""

    trips: list[str] = Field(..., min_length=1, description="Trip CSV files")
    weather: str = Field(..., description="Daily weather CSV")
    columns: ColumnMapping = Field(default_factory=ColumnMapping)

    # Cleaning
    min_duration: int = Field(60, ge=0, description="False-start threshold, seconds")
    sparse_threshold: float = Field(0.5, gt=0.0, le=1.0, description="Max missing fraction kept")
    exclude_columns: list[str] = Field(default_factory=lambda: ["conditions", "address", "location"])

    # Features
    redundancy_threshold: float = Field(0.9, gt=0.0, le=1.0)
    include_count: bool = True
    standardize: list[str] | None = Field(None, description="Features to standardize (default: all)")

    # Clustering
    k: int | None = Field(None, ge=1)
    k_range: tuple[int, int] = (1, 10)
    max_iterations: int = Field(10, ge=1)
    n_configurations: int = Field(25, ge=1)
    init: Literal["random", "kmeans++"] = "random"
    bootstrap: int = Field(50, ge=1)
    gap_rule: Literal["one_se", "argmax"] = "one_se"
    seed: int = Field(20200501, ge=0, lt=2**64)

    # Reports
    seasons: SeasonDefinition = Field(default_factory=SeasonDefinition.meteorological)
    calendar: str | None = None
    top_anomalies: int = Field(10, ge=1)

    out: str = "out"

    @field_validator("k_range")
    @classmethod
    def _ordered_range(cls, k_range: tuple[int, int]) -> tuple[int, int]:
        low, high = k_range
        if low < 1 or high < low:
            raise ValueError(f"k_range must satisfy 1 <= low <= high, got {low}..{high}")
        return k_range

    def kmeans_config(self, k: int, workers: int = 1) -> KMeansConfig:
        return KMeansConfig(
            k=k,
            max_iterations=self.max_iterations,
            n_configurations=self.n_configurations,
            seed=self.seed,
            init=self.init,
            workers=workers,
        )

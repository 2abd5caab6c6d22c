# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Post-clustering reports: cluster profiles, seasons, working days and anomalies"""

import datetime as dt
import logging
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
import pandas as pd
import pydantic
import yaml

from models import (
    AnomalyFlag,
    CalendarConfig,
    ClusterSummary,
    CountStats,
    DailyRecord,
    FeatureStats,
    SeasonAverage,
    SeasonClusterStats,
    SeasonDefinition,
    WorkdaySplit,
)

from ..core.errors import AnalysisError, ConfigError
from .ingest import records_to_frame
from .kmeans import ClusteringResult
from .preprocess import FeatureMatrix

logger = logging.getLogger(__name__)


def _labelled(records: list[DailyRecord], assignments) -> pd.DataFrame:
    assignments = np.asarray(assignments, dtype=int)
    if len(assignments) != len(records):
        raise AnalysisError(f"{len(assignments)} assignments for {len(records)} records")
    frame = records_to_frame(records)
    frame["date"] = [r.date for r in records]
    frame["cluster"] = assignments
    return frame


def round_half_away(value: Decimal) -> int:
    return int(value.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def cluster_summary(records: list[DailyRecord], result: ClusteringResult) -> list[ClusterSummary]:
    """Per-cluster min / max / mean / median of every feature, original units"""
    frame = _labelled(records, result.assignments)
    features = [c for c in frame.columns if c not in ("date", "cluster")]
    summaries = []
    for cluster, group in frame.groupby("cluster", sort=True):
        stats = group[features].agg(["min", "max", "mean", "median"])
        summaries.append(
            ClusterSummary(
                cluster_index=int(cluster),
                size=len(group),
                features={
                    name: FeatureStats(**{stat: float(stats.at[stat, name]) for stat in stats.index})
                    for name in features
                },
            )
        )
    return summaries


def seasonal_averages(records: list[DailyRecord], seasons: SeasonDefinition | None = None) -> dict[str, SeasonAverage]:
    """Trips per day by season: total trips over days observed"""
    if not records:
        raise AnalysisError("seasonal averages need at least one record")
    seasons = seasons or SeasonDefinition.meteorological()

    totals: dict[str, list[int]] = {name: [0, 0] for name in seasons.ordered_names()}
    for record in records:
        tally = totals[seasons.season_of(record.date)]
        tally[0] += 1
        tally[1] += record.count

    averages = {}
    for name, (observations, trips) in totals.items():
        if observations == 0:
            logger.warning(f"Season '{name}' has no observations and is omitted")
            continue
        averages[name] = SeasonAverage(
            observations=observations,
            total_trips=trips,
            average_per_day=trips / observations,
            average_display=round_half_away(Decimal(trips) / Decimal(observations)),
        )
    return averages


def cluster_season_breakdown(
    records: list[DailyRecord], assignments, seasons: SeasonDefinition | None = None
) -> dict[str, dict[str, SeasonClusterStats]]:
    """Trip count statistics per cluster and season"""
    seasons = seasons or SeasonDefinition.meteorological()
    frame = _labelled(records, assignments)
    frame["season"] = [seasons.season_of(d) for d in frame["date"]]
    order = seasons.ordered_names()

    breakdown: dict[str, dict[str, SeasonClusterStats]] = {}
    for cluster, group in frame.groupby("cluster", sort=True):
        per_season = {}
        for season, counts in group.groupby("season")["count"]:
            per_season[season] = SeasonClusterStats(
                observations=len(counts),
                total_trips=int(counts.sum()),
                mean=float(counts.mean()),
                median=float(counts.median()),
            )
        breakdown[str(cluster)] = {s: per_season[s] for s in order if s in per_season}
    return breakdown


def _count_stats(counts: pd.Series) -> CountStats:
    if counts.empty:
        return CountStats(size=0)
    return CountStats(size=len(counts), mean=float(counts.mean()), median=float(counts.median()))


def workday_split(
    records: list[DailyRecord], assignments, calendar: CalendarConfig | None = None
) -> dict[str, WorkdaySplit]:
    """Per-cluster trip counts on working versus non-working days"""
    calendar = calendar or CalendarConfig()
    frame = _labelled(records, assignments)

    record_years = {d.year for d in frame["date"]}
    holiday_years = {h.year for h in calendar.holidays}
    uncovered = sorted(record_years - holiday_years)
    if uncovered:
        logger.warning(f"Holiday calendar has no entries for year(s) {uncovered}; only weekends count as non-working")

    frame["working"] = [calendar.is_working_day(d) for d in frame["date"]]
    split = {}
    for cluster, group in frame.groupby("cluster", sort=True):
        split[str(cluster)] = WorkdaySplit(
            working=_count_stats(group.loc[group["working"], "count"]),
            nonworking=_count_stats(group.loc[~group["working"], "count"]),
        )
    return split


def flag_anomalies(matrix: FeatureMatrix, result: ClusteringResult, top_n: int = 10) -> list[AnomalyFlag]:
    """Days farthest from their own centroid in standardized units.

    Ranked by distance descending, earlier date first on ties. The note
    names the feature that deviates most from the centroid.
    """
    if top_n < 1:
        raise AnalysisError(f"top_n must be at least 1, got {top_n}")
    assignments = np.asarray(result.assignments, dtype=int)
    if len(assignments) != matrix.n:
        raise AnalysisError(f"{len(assignments)} assignments for {matrix.n} rows")
    if result.centroids.shape[1] != matrix.d:
        raise AnalysisError(f"centroids have {result.centroids.shape[1]} features, matrix has {matrix.d}")
    if top_n > matrix.n:
        logger.warning(f"Requested {top_n} anomalies but only {matrix.n} records exist; returning all")
        top_n = matrix.n

    deviation = matrix.rows - result.centroids[assignments]
    distance = np.sqrt(np.einsum("nd,nd->n", deviation, deviation))
    ordinals = np.array([d.toordinal() for d in matrix.dates])
    order = np.lexsort((ordinals, -distance))[:top_n]

    flags = []
    for rank, i in enumerate(order, start=1):
        j = int(np.argmax(np.abs(deviation[i])))
        flags.append(
            AnomalyFlag(
                date=matrix.dates[i],
                cluster_index=int(assignments[i]),
                distance_to_centroid=float(distance[i]),
                rank=rank,
                note=f"{matrix.feature_names[j]} {deviation[i, j]:+.2f} sd from centroid",
            )
        )
    return flags


def load_calendar(path: str | Path) -> CalendarConfig:
    """Read a YAML holiday calendar.

    holidays may be plain dates or mappings with `date` and `name`.
    """
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except FileNotFoundError as e:
        raise ConfigError(f"calendar file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in calendar {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: calendar must be a mapping")

    holidays = [entry["date"] if isinstance(entry, dict) else entry for entry in raw.get("holidays", [])]
    try:
        calendar = CalendarConfig(
            weekend_days=set(raw.get("weekend_days", [5, 6])),
            holidays=[dt.date.fromisoformat(h) if isinstance(h, str) else h for h in holidays],
        )
    except (pydantic.ValidationError, ValueError, TypeError) as e:
        raise ConfigError(f"invalid calendar {path}: {e}") from e
    logger.info(f"Loaded calendar {path}: {len(calendar.holidays)} holidays")
    return calendar


# ---------------------------------------------------------------------------
# Plot data
# ---------------------------------------------------------------------------


def scatter_frame(records: list[DailyRecord], assignments) -> pd.DataFrame:
    frame = _labelled(records, assignments)
    frame["date"] = frame["date"].map(dt.date.isoformat)
    return frame[["date", "count", "temperature", "cluster"]]


def workday_frame(records: list[DailyRecord], assignments, calendar: CalendarConfig) -> pd.DataFrame:
    frame = _labelled(records, assignments)
    frame["daytype"] = ["working" if calendar.is_working_day(d) else "nonworking" for d in frame["date"]]
    return frame[["cluster", "daytype", "count"]]


def seasons_frame(records: list[DailyRecord], assignments, seasons: SeasonDefinition) -> pd.DataFrame:
    frame = _labelled(records, assignments)
    frame["season"] = [seasons.season_of(d) for d in frame["date"]]
    return frame[["cluster", "season", "count"]]

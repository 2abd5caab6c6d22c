# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""`report` stage: cluster, season, working-day and anomaly reports plus plot data"""

import logging

from models import AnalysisReport, CalendarConfig

from ..core.errors import ArtifactError
from ..services.analysis import (
    cluster_season_breakdown,
    cluster_summary,
    flag_anomalies,
    load_calendar,
    scatter_frame,
    seasonal_averages,
    seasons_frame,
    workday_frame,
    workday_split,
)
from .context import ANALYSIS, SCATTER, SEASONS, WORKDAY, StageContext

logger = logging.getLogger(__name__)


def run(ctx: StageContext):
    config = ctx.config
    records = ctx.load_records()
    matrix = ctx.load_features()
    _, result = ctx.load_clustering(matrix)
    if [r.date for r in records] != matrix.dates:
        raise ArtifactError("daily.csv and features.csv cover different dates; re-run `cyclecluster ingest`")

    if config.calendar:
        calendar = load_calendar(config.calendar)
    else:
        logger.warning("No holiday calendar configured; only weekends count as non-working days")
        calendar = CalendarConfig()

    assignments = result.assignments
    report = AnalysisReport(
        clusters=cluster_summary(records, result),
        seasons=seasonal_averages(records, config.seasons),
        season_by_cluster=cluster_season_breakdown(records, assignments, config.seasons),
        workday=workday_split(records, assignments, calendar),
        anomalies=flag_anomalies(matrix, result, config.top_anomalies),
    )
    ctx.store.write_json(ANALYSIS, report)
    ctx.store.write_csv(SCATTER, scatter_frame(records, assignments))
    ctx.store.write_csv(WORKDAY, workday_frame(records, assignments, calendar))
    ctx.store.write_csv(SEASONS, seasons_frame(records, assignments, config.seasons))

# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""`ingest` stage: raw CSVs to the daily table and the standardized feature table"""

import logging

from models import CleaningReport

from ..services.ingest import (
    drop_sparse_columns,
    exclude_columns,
    join_daily,
    parse_trip_files,
    parse_weather,
    records_to_frame,
)
from ..services.preprocess import (
    TARGET,
    build_feature_matrix,
    pearson_correlation,
    select_features,
    standardization_params,
    standardize,
)
from .context import CLEANING_REPORT, CORRELATION, DAILY, FEATURES, PREPROCESS, StageContext

logger = logging.getLogger(__name__)


def run(ctx: StageContext):
    config = ctx.config
    store = ctx.store

    counts, false_starts = parse_trip_files(config.trips, config.min_duration, config.columns.trips)
    rows = parse_weather(config.weather, config.columns.weather)
    rows, dropped = drop_sparse_columns(rows, config.sparse_threshold)
    rows, excluded = exclude_columns(rows, config.exclude_columns)
    records, breakdown = join_daily(counts, rows)

    report = CleaningReport(
        dropped_columns=dropped,
        excluded_columns=excluded,
        rows_dropped_in_join=breakdown.missing_count + breakdown.missing_weather + breakdown.incomplete_weather,
        join_breakdown=breakdown,
        false_starts=false_starts,
        records=len(records),
    )
    store.write_json(CLEANING_REPORT, report)
    store.write_csv(DAILY, records_to_frame(records))

    raw = build_feature_matrix(records)
    corr = pearson_correlation(raw)
    selection = select_features(corr, config.redundancy_threshold)
    features = [f for f in selection.kept if config.include_count or f != TARGET]

    subset = None
    if config.standardize is not None:
        ignored = [f for f in config.standardize if f not in features]
        if ignored:
            logger.warning(f"Standardization requested for non-clustering feature(s) {ignored}; ignored")
        subset = [f for f in config.standardize if f in features]
    matrix = standardize(raw.select(features), subset)

    store.write_csv(CORRELATION, corr.to_frame())
    store.write_json(
        PREPROCESS,
        {
            "standardization": standardization_params(matrix),
            "redundancy_groups": selection.groups,
            "dropped_features": selection.dropped,
            "features": matrix.feature_names,
        },
    )
    store.write_csv(FEATURES, matrix.to_frame())
    logger.info(f"Ingested {len(records)} days; clustering features: {', '.join(matrix.feature_names)}")

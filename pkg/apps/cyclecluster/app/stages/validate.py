# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""`validate` stage: elbow, silhouette and gap curves over the configured k range"""

import pandas as pd

from ..services.validation import run_validation
from .context import VALIDATION_CSV, VALIDATION_JSON, StageContext


def run(ctx: StageContext):
    config = ctx.config
    matrix = ctx.load_features()
    report = run_validation(
        matrix,
        config.k_range,
        config.kmeans_config(k=1, workers=ctx.workers),
        B=config.bootstrap,
        seed=config.seed,
        gap_rule=config.gap_rule,
    )
    ctx.store.write_json(VALIDATION_JSON, report)
    ctx.store.write_csv(
        VALIDATION_CSV,
        pd.DataFrame(
            {
                "k": report.ks,
                "wss": report.wss_curve,
                "silhouette": report.silhouette_curve,
                "gap": report.gap_curve,
                "gap_se": report.gap_se,
            }
        ),
    )

# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Stage execution and the end-to-end pipeline"""

import logging

from models import PipelineConfig

from .core.errors import CycleClusterError, StageError
from .core.telemetry import get_metrics
from .stages import STAGES
from .stages.context import StageContext

logger = logging.getLogger(__name__)


def execute_stage(name: str, ctx: StageContext):
    """Run one stage, wrapping domain failures in StageError"""
    if name not in STAGES:
        raise StageError(name, ValueError(f"unknown stage; expected one of {', '.join(STAGES)}"))
    logger.info(f"Stage '{name}' starting (output {ctx.store.out_dir})")
    try:
        STAGES[name](ctx)
    except CycleClusterError as e:
        get_metrics()["stage_runs"].add(1, {"stage": name, "outcome": "error"})
        raise StageError(name, e) from e
    get_metrics()["stage_runs"].add(1, {"stage": name, "outcome": "ok"})
    logger.info(f"Stage '{name}' finished")


def run_pipeline(config: PipelineConfig, workers: int | None = None) -> StageContext:
    """ingest -> validate -> cluster -> report, each stage reading the previous stage's artifacts.

    When `config.k` is set the validation stage still runs so its curves are
    available alongside the clustering.
    """
    ctx = StageContext.from_config(config, workers)
    for name in STAGES:
        execute_stage(name, ctx)
    logger.info(f"Pipeline complete: {len(ctx.store.read_manifest())} artifacts in {ctx.store.out_dir}")
    return ctx

# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""
cyclecluster - Unified Entry Point
Subcommands run one pipeline stage each (ingest, validate, cluster, report)
or the whole pipeline (run). Stages exchange artifacts through --out.
"""

import argparse
import logging
import os
import re
import sys

logger = logging.getLogger(__name__)

_K_RANGE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*$")


def parse_k_range(value: str) -> tuple[int, int]:
    """Parse "A..B" into an inclusive (A, B) pair"""
    match = _K_RANGE.match(value)
    if not match:
        raise argparse.ArgumentTypeError(f"expected A..B, got '{value}'")
    low, high = int(match.group(1)), int(match.group(2))
    if low < 1 or high < low:
        raise argparse.ArgumentTypeError(f"k range must satisfy 1 <= A <= B, got {value}")
    return low, high


def build_parser() -> argparse.ArgumentParser:
    from app import __version__
    from app.config import settings

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=settings.default_config, help="pipeline YAML (default: %(default)s)")
    common.add_argument("--seed", type=int, help="master seed for k-means restarts and gap references")
    common.add_argument("--k", type=int, help="cluster count for the `cluster` stage")
    common.add_argument("--k-range", type=parse_k_range, help="validation range, e.g. 1..10")
    common.add_argument("--out", help="output directory for artifacts")
    common.add_argument("--workers", type=int, help="process-pool size (env CYCLECLUSTER_WORKERS)")
    common.add_argument("--log-level", help="logging level (env LOG_LEVEL)")

    parser = argparse.ArgumentParser(
        prog="cyclecluster",
        description="Cluster daily bike-share demand with weather using Hartigan-Wong k-means",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="parse, clean and join inputs; build feature table")
    sub.add_parser("validate", parents=[common], help="elbow, silhouette and gap curves over k")
    sub.add_parser("cluster", parents=[common], help="final clustering")
    sub.add_parser("report", parents=[common], help="cluster, season, working-day and anomaly reports")
    sub.add_parser("run", parents=[common], help="all stages in order")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point - parse arguments and run the requested stage(s)"""
    os.environ.setdefault("OTEL_SERVICE_NAME", "cyclecluster")
    args = build_parser().parse_args(argv)

    from app.config import load_pipeline_config
    from app.core.errors import CycleClusterError, StageError
    from app.core.logging import setup_logging
    from app.pipeline import execute_stage, run_pipeline
    from app.stages.context import StageContext

    setup_logging(args.log_level)

    try:
        from opentelemetry.instrumentation.logging import LoggingInstrumentor

        LoggingInstrumentor().instrument()
    except ImportError:
        pass

    overrides = {"seed": args.seed, "k": args.k, "k_range": args.k_range, "out": args.out}
    try:
        config = load_pipeline_config(args.config, overrides)
        if args.command == "run":
            run_pipeline(config, args.workers)
        else:
            execute_stage(args.command, StageContext.from_config(config, args.workers))
    except StageError as e:
        logger.error(str(e))
        return 1
    except CycleClusterError as e:
        logger.error(f"{args.command}: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

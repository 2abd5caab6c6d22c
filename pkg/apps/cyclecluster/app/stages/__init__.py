"""Pipeline stages, one per CLI subcommand"""

from . import cluster, ingest, report, validate

STAGES = {
    "ingest": ingest.run,
    "validate": validate.run,
    "cluster": cluster.run,
    "report": report.run,
}

__all__ = ["STAGES"]

# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""OpenTelemetry domain metrics

When the process runs under `opentelemetry-instrument` (or any SDK that has
configured a global MeterProvider) the counters below are exported. Otherwise
the API hands back non-recording instruments and nothing is emitted.

Counters never influence results; they only describe how much work a run did.
"""

import logging

from ..config import settings

logger = logging.getLogger(__name__)

METRIC_NAMES = {
    "kmeans_passes": ("cyclecluster.kmeans.passes", "Completed Hartigan-Wong passes"),
    "kmeans_discarded_passes": (
        "cyclecluster.kmeans.discarded_passes",
        "Passes discarded because a cluster became empty",
    ),
    "gap_references": ("cyclecluster.gap.references", "Reference datasets clustered for the gap statistic"),
    "stage_runs": ("cyclecluster.stage.runs", "Pipeline stage executions by stage and outcome"),
}


def _is_telemetry_disabled() -> bool:
    """Check if telemetry should be disabled"""
    return settings.otel_sdk_disabled


def setup_telemetry():
    """Create the cyclecluster counters on the global meter"""
    if _is_telemetry_disabled():
        logger.info("OpenTelemetry SDK is disabled via OTEL_SDK_DISABLED environment variable")
        return _create_noop_metrics()

    try:
        from opentelemetry import metrics  # noqa: PLC0415

        meter = metrics.get_meter(settings.otel_service_name)
        counters = {
            key: meter.create_counter(name=name, description=description, unit="1")
            for key, (name, description) in METRIC_NAMES.items()
        }
        logger.debug("OpenTelemetry domain metrics initialized")
        return counters

    except Exception as e:
        logger.warning(f"Failed to initialize OpenTelemetry metrics: {e}. Continuing without custom metrics.")
        return _create_noop_metrics()


def _create_noop_metrics():
    """Create no-op metrics that do nothing when called"""

    class NoopMetric:
        def add(self, *args, **kwargs):
            pass

        def record(self, *args, **kwargs):
            pass

    noop = NoopMetric()
    return dict.fromkeys(METRIC_NAMES, noop)


# Global metrics (initialized lazily by get_metrics)
_metrics = None


def get_metrics():
    """Get the metrics dictionary"""
    global _metrics
    if _metrics is None:
        _metrics = setup_telemetry()
    return _metrics


def reset_metrics():
    """Drop the cached counters so the next get_metrics() re-reads settings"""
    global _metrics
    _metrics = None

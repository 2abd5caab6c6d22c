# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Shared state and artifact loaders for pipeline stages"""

import logging
from dataclasses import dataclass

import numpy as np

from common.artifacts import ArtifactStore
from models import ArtifactMeta, ClusteringArtifact, DailyRecord, PipelineConfig

from .. import __version__
from ..config import config_digest, settings
from ..core.errors import ArtifactError
from ..services.ingest import records_from_frame
from ..services.kmeans import ClusteringResult
from ..services.preprocess import FeatureMatrix

logger = logging.getLogger(__name__)

CLEANING_REPORT = "cleaning_report.json"
DAILY = "daily.csv"
CORRELATION = "correlation.csv"
PREPROCESS = "preprocess.json"
FEATURES = "features.csv"
VALIDATION_JSON = "validation.json"
VALIDATION_CSV = "validation.csv"
CLUSTERING = "clustering.json"
ANALYSIS = "analysis.json"
SCATTER = "scatter.csv"
WORKDAY = "workday.csv"
SEASONS = "seasons.csv"


@dataclass
class StageContext:
    config: PipelineConfig
    store: ArtifactStore
    workers: int = 1

    @classmethod
    def from_config(cls, config: PipelineConfig, workers: int | None = None) -> "StageContext":
        meta = ArtifactMeta(version=__version__, seed=config.seed, config_digest=config_digest(config))
        return cls(config=config, store=ArtifactStore(config.out, meta), workers=workers or settings.workers)

    def load_records(self) -> list[DailyRecord]:
        frame = self.store.read_csv(DAILY, produced_by="ingest", dtype={"date": str})
        return records_from_frame(frame)

    def load_features(self) -> FeatureMatrix:
        params = self.store.read_json(PREPROCESS, produced_by="ingest")
        frame = self.store.read_csv(FEATURES, produced_by="ingest", dtype={"date": str})
        return FeatureMatrix.from_frame(frame, params["standardization"])

    def load_clustering(self, matrix: FeatureMatrix) -> tuple[ClusteringArtifact, ClusteringResult]:
        """Read clustering.json and check it belongs to the current feature table"""
        payload = self.store.read_json(CLUSTERING, produced_by="cluster")
        try:
            artifact = ClusteringArtifact(**payload)
        except (TypeError, ValueError) as e:
            raise ArtifactError(f"invalid {CLUSTERING}: {e}") from e

        if [a.date for a in artifact.assignments] != matrix.dates:
            raise ArtifactError(f"{CLUSTERING} dates do not match {FEATURES}; re-run `cyclecluster cluster`")
        if artifact.feature_names != matrix.feature_names:
            raise ArtifactError(
                f"{CLUSTERING} features {artifact.feature_names} differ from {FEATURES} {matrix.feature_names}"
            )

        result = ClusteringResult(
            assignments=np.array([a.cluster for a in artifact.assignments], dtype=int),
            centroids=np.array(artifact.centroids.standardized, dtype=float),
            per_cluster_wss=np.array(artifact.per_cluster_wss, dtype=float),
            total_wss=artifact.total_wss,
            iterations_used=artifact.iterations_used,
            converged=artifact.converged,
            seed_used=artifact.seed,
            restarts_discarded_for_empty_clusters=artifact.restarts_discarded_for_empty_clusters,
            best_configuration=artifact.best_configuration,
            passes_completed=0,
        )
        return artifact, result

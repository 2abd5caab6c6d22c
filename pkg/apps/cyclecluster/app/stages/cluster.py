# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""`cluster` stage: final Hartigan-Wong clustering"""

import logging

from models import CentroidSet, ClusterAssignment, ClusteringArtifact

from ..core.errors import ArtifactError
from ..services.kmeans import hartigan_wong
from ..services.preprocess import destandardize_centroids
from .context import CLUSTERING, VALIDATION_JSON, StageContext

logger = logging.getLogger(__name__)


def choose_k(ctx: StageContext) -> int:
    """Configured k, else the gap recommendation (silhouette as fallback)"""
    if ctx.config.k is not None:
        return ctx.config.k
    if not ctx.store.exists(VALIDATION_JSON):
        raise ArtifactError(
            f"no k given and {ctx.store.path(VALIDATION_JSON)} is missing; "
            "pass --k or run `cyclecluster validate` first"
        )
    recommended = ctx.store.read_json(VALIDATION_JSON).get("recommended", {})
    for method in ("gap", "silhouette"):
        if recommended.get(method) is not None:
            logger.info(f"Using k={recommended[method]} recommended by the {method} method")
            return int(recommended[method])
    raise ArtifactError(f"{VALIDATION_JSON} has no usable recommendation; pass --k")


def run(ctx: StageContext):
    matrix = ctx.load_features()
    k = choose_k(ctx)
    result = hartigan_wong(matrix, ctx.config.kmeans_config(k=k, workers=ctx.workers))

    original = destandardize_centroids(result.centroids, matrix.column_means, matrix.column_stds)
    artifact = ClusteringArtifact(
        k=k,
        seed=result.seed_used,
        total_wss=result.total_wss,
        per_cluster_wss=result.per_cluster_wss.tolist(),
        iterations_used=result.iterations_used,
        converged=result.converged,
        restarts_discarded_for_empty_clusters=result.restarts_discarded_for_empty_clusters,
        best_configuration=result.best_configuration,
        feature_names=matrix.feature_names,
        centroids=CentroidSet(original=original.tolist(), standardized=result.centroids.tolist()),
        assignments=[
            ClusterAssignment(date=day, cluster=int(c)) for day, c in zip(matrix.dates, result.assignments, strict=True)
        ],
    )
    ctx.store.write_json(CLUSTERING, artifact)
    logger.info(f"Clustered {matrix.n} days into k={k}: sizes {result.sizes().tolist()}, WSS={result.total_wss:.6g}")

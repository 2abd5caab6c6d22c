# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Choosing k: elbow on W_k, average silhouette width and the gap statistic"""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import silhouette_samples

from models import KMeansConfig, Recommendation, ValidationReport

from ..core.errors import ClusterValidationError, KMeansError
from ..core.telemetry import get_metrics
from .kmeans import ClusteringResult, as_rows, cluster_rows, pass_pool
from .preprocess import FeatureMatrix

logger = logging.getLogger(__name__)


@dataclass
class GapResult:
    ks: list[int]
    log_wk: np.ndarray
    expected_log_wk: np.ndarray
    gap: np.ndarray
    se: np.ndarray


def _ks(k_range: tuple[int, int] | Sequence[int]) -> list[int]:
    low, high = k_range[0], k_range[-1]
    if low < 1 or high < low:
        raise ClusterValidationError(f"invalid k range {low}..{high}")
    return list(range(low, high + 1))


def _for_k(config: KMeansConfig, k: int) -> KMeansConfig:
    return config.model_copy(update={"k": k})


def cluster_range(
    matrix: FeatureMatrix | np.ndarray,
    k_range: tuple[int, int],
    config: KMeansConfig,
    executor: ProcessPoolExecutor | None = None,
) -> dict[int, ClusteringResult]:
    """Best-of-restarts clustering for every k in the inclusive range"""
    rows = as_rows(matrix)
    ks = _ks(k_range)
    if ks[-1] > rows.shape[0]:
        raise ClusterValidationError(f"k range {ks[0]}..{ks[-1]} exceeds n={rows.shape[0]}")
    return {k: cluster_rows(rows, _for_k(config, k), executor) for k in ks}


def elbow_curve(matrix: FeatureMatrix | np.ndarray, k_range: tuple[int, int], config: KMeansConfig) -> list[float]:
    """W_k (best-of-restarts total WSS) for each k in the range"""
    return [result.total_wss for result in cluster_range(matrix, k_range, config).values()]


def detect_elbow(wss_curve: Sequence[float], ks: Sequence[int] | None = None) -> int:
    """k with the largest discrete second difference W_{k-1} - 2 W_k + W_{k+1}.

    The first maximum wins. A curve with equal second differences everywhere
    has no distinct elbow; the lowest interior k is returned with a warning.
    """
    curve = np.asarray(wss_curve, dtype=float)
    ks = list(ks) if ks is not None else list(range(1, len(curve) + 1))
    if len(curve) < 3:
        raise ClusterValidationError(f"elbow detection needs at least 3 points, got {len(curve)}")
    if len(ks) != len(curve):
        raise ClusterValidationError(f"{len(ks)} k values for {len(curve)} curve points")

    second = curve[:-2] - 2 * curve[1:-1] + curve[2:]
    if np.allclose(second, second[0], rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(curve).max()))):
        logger.warning("No distinct elbow in the WSS curve; using the lowest interior k")
        return ks[1]
    return ks[int(np.argmax(second)) + 1]


def silhouette_width(matrix: FeatureMatrix | np.ndarray, assignments) -> tuple[np.ndarray, float]:
    """Per-point silhouette s(i) and its average.

    a(i) is the mean distance to the other members of i's cluster, b(i) the
    smallest mean distance to another cluster, s(i) = (b - a) / max(a, b).
    Members of singleton clusters get s(i) = 0.
    """
    rows = as_rows(matrix)
    labels = np.asarray(assignments)
    if labels.shape != (rows.shape[0],):
        raise ClusterValidationError(f"{labels.shape[0]} assignments for {rows.shape[0]} rows")
    k = len(np.unique(labels))
    if k < 2:
        raise ClusterValidationError(f"silhouette needs at least 2 clusters, got {k}")
    if np.all(rows == rows[0]):
        raise ClusterValidationError("silhouette is undefined when all points are identical")

    if k == rows.shape[0]:
        scores = np.zeros(rows.shape[0])
    else:
        scores = silhouette_samples(rows, labels, metric="euclidean")
    return scores, float(np.mean(scores))


def gap_statistic(
    matrix: FeatureMatrix | np.ndarray,
    k_range: tuple[int, int],
    B: int = 50,
    config: KMeansConfig | None = None,
    seed: int | None = None,
    data_wss: Sequence[float] | None = None,
    executor: ProcessPoolExecutor | None = None,
) -> GapResult:
    """Gap_n(k) = mean_b log W_k(reference_b) - log W_k(data).

    References are drawn uniformly from the per-feature bounding box of the
    data, reference b from `default_rng([seed, b])`. The standard error is
    the population sd of the reference log W_k scaled by sqrt(1 + 1/B).
    `data_wss` reuses already computed data W_k values.
    `executor` is shared by every clustering of every reference set.
    """
    rows = as_rows(matrix)
    ks = _ks(k_range)
    config = config or KMeansConfig(k=1)
    if executor is None and config.workers > 1:
        with pass_pool(config.workers) as pool:
            return gap_statistic(matrix, k_range, B, config, seed, data_wss, pool)
    seed = config.seed if seed is None else seed
    if B < 1:
        raise ClusterValidationError(f"bootstrap count must be at least 1, got {B}")

    low, high = rows.min(axis=0), rows.max(axis=0)
    flat = np.flatnonzero(high - low == 0)
    if flat.size:
        names = matrix.feature_names if isinstance(matrix, FeatureMatrix) else [str(j) for j in range(rows.shape[1])]
        raise ClusterValidationError(
            f"reference bounding box has zero width in feature(s) {[names[j] for j in flat]}"
        )

    if data_wss is None:
        results = cluster_range(rows, (ks[0], ks[-1]), config, executor)
        data_wss = [result.total_wss for result in results.values()]
    data_wss = np.asarray(data_wss, dtype=float)
    if data_wss.shape != (len(ks),):
        raise ClusterValidationError(f"{data_wss.shape[0]} data W_k values for {len(ks)} k values")
    zero = [k for k, w in zip(ks, data_wss, strict=True) if w <= 0]
    if zero:
        raise ClusterValidationError(f"W_k is zero for k={zero}; log W_k is undefined (cap the k range)")
    log_wk = np.log(data_wss)

    n, d = rows.shape
    reference_log_wk = np.empty((B, len(ks)))
    for b in range(B):
        rng = np.random.default_rng([seed, b])
        reference = rng.uniform(low, high, size=(n, d))
        for j, k in enumerate(ks):
            reference_log_wk[b, j] = math.log(cluster_rows(reference, _for_k(config, k), executor).total_wss)
    get_metrics()["gap_references"].add(B)

    expected = reference_log_wk.mean(axis=0)
    se = reference_log_wk.std(axis=0, ddof=0) * math.sqrt(1 + 1 / B)
    return GapResult(ks=ks, log_wk=log_wk, expected_log_wk=expected, gap=expected - log_wk, se=se)


def _gap_choice(ks: list[int], gap: list[float], se: list[float], rule: str) -> int:
    if rule == "one_se":
        for j in range(len(ks) - 1):
            if gap[j] >= gap[j + 1] - se[j + 1]:
                return ks[j]
        logger.info("No k satisfies the one-standard-error rule; falling back to the gap maximum")
    return ks[int(np.argmax(gap))]


def recommend_k(report: ValidationReport) -> Recommendation:
    """Each method's preferred k. Methods that cannot be evaluated give None."""
    if not report.ks:
        raise ClusterValidationError("validation report has no k values")

    if len(report.ks) >= 3:
        elbow = detect_elbow(report.wss_curve, report.ks)
    else:
        elbow = None
        logger.warning(f"Elbow needs at least 3 k values, got {len(report.ks)}; no elbow recommendation")

    scored = [(s, k) for k, s in zip(report.ks, report.silhouette_curve, strict=True) if s is not None]
    if scored:
        best = max(s for s, _ in scored)
        silhouette = min(k for s, k in scored if s == best)
    else:
        silhouette = None
        logger.warning("No k >= 2 in range; no silhouette recommendation")

    gap = _gap_choice(report.ks, report.gap_curve, report.gap_se, report.gap_rule) if report.gap_curve else None
    return Recommendation(elbow=elbow, silhouette=silhouette, gap=gap)


def run_validation(
    matrix: FeatureMatrix | np.ndarray,
    k_range: tuple[int, int],
    config: KMeansConfig,
    B: int = 50,
    seed: int | None = None,
    gap_rule: str = "one_se",
) -> ValidationReport:
    """Compute all three curves over k_range and recommend a k per method.

    W_k is zero once k reaches the number of distinct rows (n for distinct
    points), so the range is capped one below it. Data clusterings are shared
    between the elbow, silhouette and gap computations, and one process pool
    serves all of them.
    """
    rows = as_rows(matrix)
    n = rows.shape[0]
    distinct = len(np.unique(rows, axis=0))
    low, high = k_range
    capped = high > distinct - 1
    if capped:
        if distinct == n:
            logger.warning(f"k range {low}..{high} capped at n-1={n - 1}")
        else:
            logger.warning(
                f"k range {low}..{high} capped at {distinct - 1}: only {distinct} distinct rows, so W_{distinct} = 0"
            )
        high = distinct - 1
    if low > high:
        raise ClusterValidationError(f"k range {k_range[0]}..{k_range[1]} is empty for n={n} ({distinct} distinct)")
    seed = config.seed if seed is None else seed

    with pass_pool(config.workers) as pool:
        try:
            results = cluster_range(rows, (low, high), config, pool)
        except KMeansError as e:
            raise ClusterValidationError(f"clustering failed during validation: {e}") from e
        ks = list(results)
        wss = [results[k].total_wss for k in ks]
        for k_prev, k_next, w_prev, w_next in zip(ks, ks[1:], wss, wss[1:], strict=False):
            if w_next > w_prev:
                logger.warning(f"W_k is not monotone: W_{k_next}={w_next:.6g} > W_{k_prev}={w_prev:.6g}")

        silhouettes = [silhouette_width(rows, results[k].assignments)[1] if k >= 2 else None for k in ks]
        gap = gap_statistic(rows, (low, high), B, config, seed, data_wss=wss, executor=pool)

    report = ValidationReport(
        ks=ks,
        wss_curve=wss,
        silhouette_curve=silhouettes,
        log_wk=gap.log_wk.tolist(),
        expected_log_wk=gap.expected_log_wk.tolist(),
        gap_curve=gap.gap.tolist(),
        gap_se=gap.se.tolist(),
        bootstrap_count=B,
        gap_rule=gap_rule,
        seed=seed,
        k_range_capped=capped,
    )
    report.recommended = recommend_k(report)
    logger.info(
        f"Validation over k={low}..{high}: elbow={report.recommended.elbow}, "
        f"silhouette={report.recommended.silhouette}, gap={report.recommended.gap}"
    )
    return report

# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Hartigan-Wong k-means with seeded random restarts.

A pass starts from k distinct data rows, assigns every point to its nearest
centroid (lowest index wins ties), then sweeps the points in order, moving
point i from cluster r to cluster s whenever

    n_r * d(i, c_r)^2 / (n_r - 1)  >  n_s * d(i, c_s)^2 / (n_s + 1) + tolerance

with s the cheapest receiving cluster. Both centroids are updated after every
accepted move. A pass ends after a sweep without moves or after
`max_iterations` sweeps.

Pass `c` draws from `numpy.random.default_rng([seed, c])`, so passes are
independent of execution order and may run in a process pool.
"""

import logging
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from functools import partial

import numpy as np

from models import KMeansConfig

from ..core.errors import KMeansError
from ..core.telemetry import get_metrics
from .preprocess import FeatureMatrix

logger = logging.getLogger(__name__)

# Relative slack for the debug-mode monotonicity check
_MONOTONE_RTOL = 1e-9


@dataclass
class ClusteringResult:
    assignments: np.ndarray
    centroids: np.ndarray
    per_cluster_wss: np.ndarray
    total_wss: float
    iterations_used: int
    converged: bool
    seed_used: int
    restarts_discarded_for_empty_clusters: int
    best_configuration: int
    passes_completed: int

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


@dataclass
class _Pass:
    counter: int
    assignments: np.ndarray
    centroids: np.ndarray
    per_cluster_wss: np.ndarray
    total_wss: float
    iterations: int
    converged: bool


def as_rows(matrix: FeatureMatrix | np.ndarray) -> np.ndarray:
    rows = matrix.rows if isinstance(matrix, FeatureMatrix) else np.asarray(matrix, dtype=float)
    if rows.ndim != 2:
        raise KMeansError(f"expected an n x d matrix, got shape {rows.shape}")
    return rows


def euclidean_distance(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise KMeansError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.sqrt(np.sum((x - y) ** 2)))


def _squared_distances(rows: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = rows[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _distinct_rows(rows: np.ndarray) -> np.ndarray:
    """Index of the first occurrence of every distinct row, in row order"""
    _, first = np.unique(rows, axis=0, return_index=True)
    return np.sort(first)


def _pick_centroids(rows: np.ndarray, candidates: np.ndarray, k: int, rng: np.random.Generator, method: str):
    if len(candidates) < k:
        raise KMeansError(f"cannot choose {k} centroids from {len(candidates)} distinct rows")
    if method == "random":
        chosen = rng.choice(candidates, size=k, replace=False)
    elif method == "kmeans++":
        chosen = [int(rng.choice(candidates))]
        closest = np.sum((rows[candidates] - rows[chosen[0]]) ** 2, axis=1)
        for _ in range(1, k):
            pick = int(rng.choice(candidates, p=closest / closest.sum()))
            chosen.append(pick)
            closest = np.minimum(closest, np.sum((rows[candidates] - rows[pick]) ** 2, axis=1))
    else:
        raise KMeansError(f"unknown initialization method '{method}'")
    return rows[np.asarray(chosen)].copy()


def init_centroids(
    matrix: FeatureMatrix | np.ndarray, k: int, seed, method: str = "random"
) -> np.ndarray:
    """Pick k distinct data rows as starting centroids.

    `seed` is anything `numpy.random.default_rng` accepts, including a
    Generator. "random" samples uniformly without replacement; "kmeans++"
    uses D^2 weighting over the distinct rows.
    """
    rows = as_rows(matrix)
    if k < 1:
        raise KMeansError(f"k must be at least 1, got {k}")
    return _pick_centroids(rows, _distinct_rows(rows), k, np.random.default_rng(seed), method)


def per_cluster_wss(matrix: FeatureMatrix | np.ndarray, assignments, centroids) -> np.ndarray:
    """Sum of squared distances of each cluster's members to its centroid"""
    rows = as_rows(matrix)
    assignments = np.asarray(assignments, dtype=int)
    centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
    if assignments.shape != (rows.shape[0],):
        raise KMeansError(f"{assignments.shape[0]} assignments for {rows.shape[0]} rows")
    if centroids.shape[1] != rows.shape[1]:
        raise KMeansError(f"centroids have {centroids.shape[1]} dimensions, rows have {rows.shape[1]}")
    k = centroids.shape[0]
    if assignments.min(initial=0) < 0 or assignments.max(initial=0) >= k:
        raise KMeansError(f"assignment outside [0, {k})")
    sizes = np.bincount(assignments, minlength=k)
    empty = np.flatnonzero(sizes == 0)
    if empty.size:
        raise KMeansError(f"cluster(s) {empty.tolist()} are empty")
    residual = rows - centroids[assignments]
    return np.bincount(assignments, weights=np.einsum("nd,nd->n", residual, residual), minlength=k)


def total_wss(matrix: FeatureMatrix | np.ndarray, assignments, centroids) -> float:
    return float(per_cluster_wss(matrix, assignments, centroids).sum())


def _means(rows: np.ndarray, assignments: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    counts = np.bincount(assignments, minlength=k)
    sums = np.column_stack(
        [np.bincount(assignments, weights=rows[:, j], minlength=k) for j in range(rows.shape[1])]
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        centroids = sums / counts[:, None]
    return sums, counts, centroids


class _TransferCosts:
    """Both sides of the transfer rule for every point.

    `addition[i, j]` is n_j * d(i, c_j)^2 / (n_j + 1), infinite for i's own
    cluster; `removal[i]` is n_r * d(i, c_r)^2 / (n_r - 1), or -inf when i is
    alone in r. A move touches two clusters, so only their columns and
    members are refreshed. `dist2`, `counts` and `assignments` are shared
    with the pass and mutated by it.
    """

    def __init__(self, dist2: np.ndarray, counts: np.ndarray, assignments: np.ndarray):
        self.dist2 = dist2
        self.counts = counts
        self.assignments = assignments
        self.addition = np.empty_like(dist2)
        self.removal = np.full(dist2.shape[0], -np.inf)
        for j in range(dist2.shape[1]):
            self.refresh(j)

    def refresh(self, j: int):
        members = self.assignments == j
        size = self.counts[j]
        column = size * self.dist2[:, j] / (size + 1)
        column[members] = np.inf
        self.addition[:, j] = column
        self.removal[members] = size * self.dist2[members, j] / (size - 1) if size > 1 else -np.inf

    def next_move(self, start: int, tolerance: float) -> tuple[int, int] | None:
        """First point at or after `start` whose transfer lowers WSS, and its cheapest target"""
        if start >= self.dist2.shape[0]:
            return None
        gain = self.removal[start:] - self.addition[start:].min(axis=1)
        hits = np.flatnonzero(gain > tolerance)
        if hits.size == 0:
            return None
        i = start + int(hits[0])
        return i, int(np.argmin(self.addition[i]))


def _run_pass(rows: np.ndarray, config: KMeansConfig, candidates: np.ndarray, counter: int) -> _Pass | None:
    """One seeded pass. Returns None when a cluster ends up empty."""
    k = config.k
    rng = np.random.default_rng([config.seed, counter])
    centroids = _pick_centroids(rows, candidates, k, rng, config.init)
    assignments = np.argmin(_squared_distances(rows, centroids), axis=1)
    sums, counts, centroids = _means(rows, assignments, k)
    if np.any(counts == 0):
        return None

    dist2 = _squared_distances(rows, centroids)
    costs = _TransferCosts(dist2, counts, assignments)
    wss = total_wss(rows, assignments, centroids) if config.debug else None
    iterations = 0
    converged = False

    while iterations < config.max_iterations:
        iterations += 1
        moves = 0
        i = 0
        # Points that do not move leave the state untouched, so jumping to the
        # next point satisfying the rule is the same as visiting each in turn.
        while (move := costs.next_move(i, config.tolerance)) is not None:
            i, s = move
            r = int(assignments[i])
            x = rows[i]
            sums[r] -= x
            counts[r] -= 1
            centroids[r] = sums[r] / counts[r]
            sums[s] += x
            counts[s] += 1
            centroids[s] = sums[s] / counts[s]
            assignments[i] = s
            for j in (r, s):
                diff = rows - centroids[j]
                dist2[:, j] = np.einsum("nd,nd->n", diff, diff)
                costs.refresh(j)
            moves += 1
            if config.debug:
                updated = total_wss(rows, assignments, centroids)
                if updated > wss + _MONOTONE_RTOL * max(1.0, wss):
                    raise KMeansError(f"WSS increased from {wss} to {updated} moving point {i} from {r} to {s}")
                wss = updated
            i += 1
        if moves == 0:
            converged = True
            break

    # Running sums drift; finish on exact means
    _, counts, centroids = _means(rows, assignments, k)
    if np.any(counts == 0):
        return None
    per_cluster = per_cluster_wss(rows, assignments, centroids)
    return _Pass(
        counter=counter,
        assignments=assignments,
        centroids=centroids,
        per_cluster_wss=per_cluster,
        total_wss=float(per_cluster.sum()),
        iterations=iterations,
        converged=converged,
    )


@contextmanager
def pass_pool(workers: int) -> Iterator[ProcessPoolExecutor | None]:
    """Process pool for independent passes, shared across calls. None for one worker."""
    if workers <= 1:
        yield None
        return
    with ProcessPoolExecutor(max_workers=workers) as executor:
        yield executor


def cluster_rows(
    rows: np.ndarray, config: KMeansConfig, executor: ProcessPoolExecutor | None = None
) -> ClusteringResult:
    """Best of `n_configurations` Hartigan-Wong passes over a raw array.

    Without an `executor`, a pool of `config.workers` processes lives for
    this call only.
    """
    if executor is None and config.workers > 1:
        with pass_pool(config.workers) as pool:
            return cluster_rows(rows, config, pool)

    rows = as_rows(rows)
    n = rows.shape[0]
    if config.k > n:
        raise KMeansError(f"k={config.k} exceeds the number of rows ({n})")

    wanted = config.n_configurations
    limit = 2 * wanted
    completed: list[_Pass] = []
    discarded = 0
    next_counter = 0

    run = partial(_run_pass, rows, config, _distinct_rows(rows))
    while len(completed) < wanted and next_counter < limit:
        batch = range(next_counter, min(next_counter + wanted - len(completed), limit))
        next_counter = batch.stop
        outcomes = executor.map(run, batch) if executor else map(run, batch)
        for outcome in outcomes:
            if outcome is None:
                discarded += 1
            else:
                completed.append(outcome)

    metrics = get_metrics()
    metrics["kmeans_passes"].add(len(completed), {"k": config.k})
    if discarded:
        metrics["kmeans_discarded_passes"].add(discarded, {"k": config.k})
        logger.warning(f"k={config.k}: discarded {discarded} pass(es) with an empty cluster")

    if not completed:
        raise KMeansError(f"k={config.k}: every pass produced an empty cluster ({discarded} attempts)")

    best = min(completed, key=lambda p: (p.total_wss, p.counter))
    logger.debug(
        f"k={config.k}: best pass {best.counter} of {len(completed)}, WSS={best.total_wss:.6g}, "
        f"{best.iterations} sweep(s), converged={best.converged}"
    )
    return ClusteringResult(
        assignments=best.assignments,
        centroids=best.centroids,
        per_cluster_wss=best.per_cluster_wss,
        total_wss=best.total_wss,
        iterations_used=best.iterations,
        converged=best.converged,
        seed_used=config.seed,
        restarts_discarded_for_empty_clusters=discarded,
        best_configuration=best.counter,
        passes_completed=len(completed),
    )


def hartigan_wong(
    matrix: FeatureMatrix, config: KMeansConfig, allow_unstandardized: bool = False
) -> ClusteringResult:
    """Cluster the rows of a standardized feature matrix"""
    if not matrix.standardized and not allow_unstandardized:
        raise KMeansError("feature matrix is not standardized; pass allow_unstandardized=True to cluster raw values")
    return cluster_rows(matrix.rows, config)

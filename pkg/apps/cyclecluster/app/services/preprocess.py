# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Feature matrix construction, correlation-based selection and z-scoring"""

import datetime as dt
import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from common.columns import canonical_order
from models import DailyRecord

from ..core.errors import PreprocessError

logger = logging.getLogger(__name__)

TARGET = "count"


@dataclass
class FeatureMatrix:
    """n x d feature table. Rows follow `dates`; columns follow `feature_names`."""

    feature_names: list[str]
    rows: np.ndarray
    dates: list[dt.date]
    standardized: bool = False
    column_means: np.ndarray | None = None
    column_stds: np.ndarray | None = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2:
            raise PreprocessError(f"feature rows must be two-dimensional, got shape {self.rows.shape}")
        n, d = self.rows.shape
        if d != len(self.feature_names):
            raise PreprocessError(f"{d} columns but {len(self.feature_names)} feature names")
        if n != len(self.dates):
            raise PreprocessError(f"{n} rows but {len(self.dates)} dates")
        if self.column_means is None:
            self.column_means = np.zeros(d)
        if self.column_stds is None:
            self.column_stds = np.ones(d)
        self.column_means = np.asarray(self.column_means, dtype=float)
        self.column_stds = np.asarray(self.column_stds, dtype=float)
        if np.any(self.column_stds <= 0):
            raise PreprocessError("standardization scales must be positive")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.feature_names.index(name)]

    def select(self, names: list[str]) -> "FeatureMatrix":
        """Sub-matrix with the named columns, in the given order"""
        unknown = [n for n in names if n not in self.feature_names]
        if unknown:
            raise PreprocessError(f"unknown features {unknown}")
        idx = [self.feature_names.index(n) for n in names]
        return replace(
            self,
            feature_names=list(names),
            rows=self.rows[:, idx],
            column_means=self.column_means[idx],
            column_stds=self.column_stds[idx],
        )

    def original_rows(self) -> np.ndarray:
        return self.rows * self.column_stds + self.column_means

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.rows, columns=self.feature_names)
        frame.insert(0, "date", [d.isoformat() for d in self.dates])
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, standardization: dict[str, dict[str, float]]) -> "FeatureMatrix":
        """Rebuild a standardized matrix from features.csv and its scaling parameters"""
        names = [c for c in frame.columns if c != "date"]
        missing = [n for n in names if n not in standardization]
        if missing:
            raise PreprocessError(f"no standardization parameters for {missing}")
        return cls(
            feature_names=names,
            rows=frame[names].to_numpy(dtype=float),
            dates=[dt.date.fromisoformat(str(d)) for d in frame["date"]],
            standardized=True,
            column_means=np.array([standardization[n]["mean"] for n in names]),
            column_stds=np.array([standardization[n]["std"] for n in names]),
        )


@dataclass
class CorrelationMatrix:
    feature_names: list[str]
    values: np.ndarray

    def r(self, a: str, b: str) -> float:
        return float(self.values[self.feature_names.index(a), self.feature_names.index(b)])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=self.feature_names)
        frame.insert(0, "feature", self.feature_names)
        return frame


@dataclass
class FeatureSelection:
    kept: list[str]
    dropped: list[str]
    groups: list[list[str]]


def build_feature_matrix(records: list[DailyRecord], features: list[str] | None = None) -> FeatureMatrix:
    """Raw (unstandardized) matrix in canonical column order"""
    if not records:
        raise PreprocessError("no daily records to build a feature matrix from")
    available = {"count", "temperature", "precipitation", "wind_speed", "cloud_cover", "relative_humidity"}
    available |= set(records[0].extras)
    names = canonical_order(features if features is not None else available)
    unknown = [n for n in names if n not in available]
    if unknown:
        raise PreprocessError(f"unknown features {unknown}; available: {canonical_order(available)}")
    rows = np.array([[r.value(n) for n in names] for r in records], dtype=float)
    return FeatureMatrix(feature_names=names, rows=rows, dates=[r.date for r in records])


def _constant_columns(matrix: FeatureMatrix) -> list[str]:
    spread = np.ptp(matrix.rows, axis=0)
    return [name for name, width in zip(matrix.feature_names, spread, strict=True) if width == 0]


def pearson_correlation(matrix: FeatureMatrix) -> CorrelationMatrix:
    """Pairwise Pearson r between every pair of columns"""
    if matrix.n < 2:
        raise PreprocessError(f"correlation needs at least 2 rows, got {matrix.n}")
    constant = _constant_columns(matrix)
    if constant:
        raise PreprocessError(f"constant column(s) have undefined correlation: {', '.join(constant)}")

    values = np.corrcoef(matrix.rows, rowvar=False).reshape(matrix.d, matrix.d)
    values = np.clip((values + values.T) / 2, -1.0, 1.0)
    np.fill_diagonal(values, 1.0)
    return CorrelationMatrix(feature_names=list(matrix.feature_names), values=values)


def select_features(
    corr: CorrelationMatrix, redundancy_threshold: float = 0.9, target: str = TARGET
) -> FeatureSelection:
    """Drop redundant features.

    Features whose |r| exceeds the threshold are linked, and each connected
    group keeps the member most correlated (in absolute value) with `target`.
    Ties go to the earlier feature in canonical order. `target` is never dropped.
    """
    if not 0 < redundancy_threshold <= 1:
        raise PreprocessError(f"redundancy threshold must lie in (0, 1], got {redundancy_threshold}")
    if target not in corr.feature_names:
        raise PreprocessError(f"target feature '{target}' missing from correlation matrix")

    candidates = [n for n in canonical_order(corr.feature_names) if n != target]
    idx = [corr.feature_names.index(n) for n in candidates]
    sub = np.abs(corr.values[np.ix_(idx, idx)])
    adjacency = sub > redundancy_threshold
    np.fill_diagonal(adjacency, False)
    _, labels = connected_components(csr_matrix(adjacency), directed=False)

    kept, dropped, groups = [target], [], []
    for label in dict.fromkeys(labels):
        members = [candidates[i] for i in np.flatnonzero(labels == label)]
        if len(members) == 1:
            kept.append(members[0])
            continue
        strength = [abs(corr.r(m, target)) for m in members]
        winner = members[int(np.argmax(strength))]
        groups.append(members)
        kept.append(winner)
        dropped.extend(m for m in members if m != winner)
        logger.info(f"Redundant group {members}: keeping '{winner}'")

    return FeatureSelection(kept=canonical_order(kept), dropped=canonical_order(dropped), groups=groups)


def standardize(matrix: FeatureMatrix, features: list[str] | None = None) -> FeatureMatrix:
    """Z-score columns with the sample (n-1) standard deviation.

    Only `features` are scaled when given; other columns keep their current
    parameters. Re-standardizing a standardized matrix composes the new
    scaling with the old one, so `original_rows` still recovers the raw values.
    """
    if matrix.n < 2:
        raise PreprocessError(f"standardization needs at least 2 rows, got {matrix.n}")
    targets = matrix.feature_names if features is None else features
    unknown = [f for f in targets if f not in matrix.feature_names]
    if unknown:
        raise PreprocessError(f"cannot standardize unknown features {unknown}")

    means = np.zeros(matrix.d)
    stds = np.ones(matrix.d)
    for name in targets:
        j = matrix.feature_names.index(name)
        column = matrix.rows[:, j]
        std = float(np.std(column, ddof=1))
        if std == 0:
            raise PreprocessError(f"feature '{name}' has zero variance and cannot be standardized")
        means[j] = float(np.mean(column))
        stds[j] = std

    return replace(
        matrix,
        rows=(matrix.rows - means) / stds,
        standardized=True,
        column_means=matrix.column_means + matrix.column_stds * means,
        column_stds=matrix.column_stds * stds,
    )


def destandardize_centroids(centroids: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    """Map standardized centroids back to original units"""
    centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    if means.shape != stds.shape or centroids.shape[1] != means.shape[0]:
        raise PreprocessError(
            f"dimension mismatch: centroids {centroids.shape}, means {means.shape}, stds {stds.shape}"
        )
    return centroids * stds + means


def standardization_params(matrix: FeatureMatrix) -> dict[str, dict[str, float]]:
    return {
        name: {"mean": float(mean), "std": float(std)}
        for name, mean, std in zip(matrix.feature_names, matrix.column_means, matrix.column_stds, strict=True)
    }

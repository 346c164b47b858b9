"""
LabelMap - Geometry
Core data containers: input dissimilarities, class labels, co-membership,
and the evolving 2-D embedding with its induced distances.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Tuple
import logging

import numpy as np
from scipy.spatial.distance import pdist, squareform

from labelmap.errors import (
    AsymmetricMatrix, DegenerateInput, DimensionMismatch, InvalidConfig, NegativeDistance,
    ParseError
)

logger = logging.getLogger(__name__)


class DistanceMetric(str, Enum):
    EUCLIDEAN = 'euclidean'
    MANHATTAN = 'manhattan'

    @property
    def scipy_name(self):
        return 'cityblock' if self is DistanceMetric.MANHATTAN else 'euclidean'


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """
    Dense symmetric n x n matrix of nonnegative dissimilarities with zero diagonal.
    No metric (triangle inequality) or Euclidean assumption is made.
    """
    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionMismatch(f"Dissimilarity matrix must be square, got shape {d.shape}")
        if d.shape[0] < 2:
            raise DegenerateInput(f"Need at least 2 points, got {d.shape[0]}")
        if not np.all(np.isfinite(d)):
            raise ParseError("Dissimilarity matrix contains non-finite values")
        if not np.array_equal(d, d.T):
            raise AsymmetricMatrix("Dissimilarity matrix is not symmetric")
        if np.any(np.diag(d) != 0):
            raise ParseError("Dissimilarity matrix has a nonzero diagonal")
        if np.any(d < 0):
            raise NegativeDistance("Dissimilarity matrix has negative entries")
        d.setflags(write=False)
        object.__setattr__(self, 'd', d)

    @property
    def n(self):
        return self.d.shape[0]

    @classmethod
    def from_points(cls, points, metric=DistanceMetric.EUCLIDEAN):
        """Pairwise distances between the rows of a feature array."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise DimensionMismatch(f"Feature array must be 2-D, got shape {points.shape}")
        metric = DistanceMetric(metric)
        return cls(squareform(pdist(points, metric=metric.scipy_name)))


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Per-point class identifiers, compared by equality only."""
    labels: Tuple[Hashable, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise DegenerateInput("Label vector is empty")
        object.__setattr__(self, 'labels', labels)

    def __len__(self):
        return len(self.labels)

    @property
    def classes(self):
        """Distinct labels sorted by their string form (plot/legend order)."""
        return sorted(set(self.labels), key=str)

    def codes(self):
        """Integer code per point, assigned in order of first appearance."""
        index = {}
        return np.array([index.setdefault(label, len(index)) for label in self.labels],
                        dtype=np.int64)


@dataclass(frozen=True, eq=False)
class CoMembership:
    """Binary matrix: a[i][j] is True iff points i and j share a label."""
    a: np.ndarray

    @property
    def n(self):
        return self.a.shape[0]


@dataclass(eq=False)
class Embedding:
    """n x 2 map coordinates. Mutated in place only by the optimizer."""
    y: np.ndarray

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        if y.ndim != 2 or y.shape[1] != 2:
            raise DimensionMismatch(f"Embedding must be n x 2, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ParseError("Embedding contains non-finite coordinates")
        self.y = y

    @property
    def n(self):
        return self.y.shape[0]

    def copy(self):
        return Embedding(self.y.copy())


def as_labels(labels):
    """Accept a LabelVector or any sequence of tokens."""
    return labels if isinstance(labels, LabelVector) else LabelVector(tuple(labels))


def co_membership(labels):
    """Build the co-membership matrix A from class labels."""
    codes = as_labels(labels).codes()
    a = codes[:, None] == codes[None, :]
    a.setflags(write=False)
    return CoMembership(a)


def map_distances(e: Embedding) -> DissimilarityMatrix:
    """Euclidean distances between embedding rows."""
    return DissimilarityMatrix(squareform(pdist(e.y)))


def condensed(d: DissimilarityMatrix) -> np.ndarray:
    """Strict upper triangle (i < j) in row-major order, same layout as pdist."""
    return squareform(d.d, checks=False)


def pairwise_stats(d: DissimilarityMatrix):
    """
    Mean and population standard deviation over the strict upper triangle.

    Returns:
        (mean, std) tuple; std is 0 when all distances are equal
    """
    values = condensed(d)
    return float(values.mean()), float(values.std())


def normalize_distances(d: DissimilarityMatrix, mode='none') -> DissimilarityMatrix:
    """
    Optionally rescale input distances.

    Args:
        d: input dissimilarities
        mode: 'none' (unchanged) or 'mean' (divide by the mean pair distance)
    """
    if mode in (None, 'none'):
        return d
    if mode != 'mean':
        raise InvalidConfig(f"Unknown normalization: {mode}")

    mean, _ = pairwise_stats(d)
    if mean <= 0:
        raise DegenerateInput("Cannot normalize: all input distances are zero")
    logger.info(f"Normalizing input distances by mean {mean:.6g}")
    return DissimilarityMatrix(d.d / mean)


def check_dimensions(e: Embedding, d: DissimilarityMatrix, a: CoMembership):
    """Raise DimensionMismatch unless embedding, distances and A agree on n."""
    if not (e.n == d.n == a.n):
        raise DimensionMismatch(
            f"Inconsistent sizes: embedding {e.n}, distances {d.n}, co-membership {a.n}"
        )

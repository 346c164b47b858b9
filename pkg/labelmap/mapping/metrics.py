"""
LabelMap - Map Quality Metrics
Rank-based quality scores (trustworthiness, continuity, k-NN label
accuracy) and a census of tears / false neighborhoods split by
within-class and between-class pairs.

Neighbor ranks are computed with a stable sort, so ties go to the lower
point index.
"""

from collections import Counter
from dataclasses import asdict, dataclass
import logging

import numpy as np
from scipy.linalg import orthogonal_procrustes
from scipy.spatial.distance import pdist

from labelmap.config import DEFAULT_NEIGHBORHOOD_SIZE
from labelmap.errors import DimensionMismatch, InvalidK, SizeMismatch
from labelmap.mapping.geometry import (
    CoMembership, DissimilarityMatrix, Embedding, as_labels, co_membership, map_distances
)

logger = logging.getLogger(__name__)

REPORT_KEYS = (
    'k', 'trustworthiness', 'continuity', 'knn_accuracy',
    'fn_within', 'fn_between', 'tear_within', 'tear_between',
)
CSV_COLUMNS = REPORT_KEYS


@dataclass(frozen=True)
class MapQualityReport:
    k: int
    trustworthiness: float
    continuity: float
    knn_accuracy: float
    fn_within: int
    fn_between: int
    tear_within: int
    tear_between: int

    def to_dict(self):
        return asdict(self)

    def _format(self, key):
        value = getattr(self, key)
        return str(value) if isinstance(value, int) else f"{value:.12f}"

    def to_text(self):
        """Flat key=value block, one key per line in REPORT_KEYS order."""
        return ''.join(f"{key}={self._format(key)}\n" for key in REPORT_KEYS)

    def to_csv_row(self):
        """Values in REPORT_KEYS column order, as strings."""
        return [self._format(key) for key in REPORT_KEYS]

    @classmethod
    def from_text(cls, text):
        values = dict(line.split('=', 1) for line in text.splitlines() if '=' in line)
        return cls(**{
            key: int(values[key]) if key in ('k',) or key.startswith(('fn_', 'tear_'))
            else float(values[key])
            for key in REPORT_KEYS
        })


def _validate_k(k, n, below_half=False):
    if not isinstance(k, (int, np.integer)) or k < 1 or k > n - 1:
        raise InvalidK(f"k must be an integer in [1, {n - 1}], got {k}")
    if below_half and not k < n / 2:
        raise InvalidK(f"k must be < n/2 = {n / 2} for rank scores, got {k}")


def _neighbor_order(d: DissimilarityMatrix):
    """Each row: the other points sorted nearest first (stable, ties by index)."""
    masked = np.array(d.d, dtype=float)
    np.fill_diagonal(masked, np.inf)
    return np.argsort(masked, axis=1, kind='stable')[:, :d.n - 1]


def _ranks(order):
    """rank[i, j] = 1-based position of j among i's neighbors; 0 on the diagonal."""
    n = order.shape[0]
    ranks = np.zeros((n, n), dtype=np.int64)
    rows = np.repeat(np.arange(n), n - 1)
    ranks[rows, order.ravel()] = np.tile(np.arange(1, n), n)
    return ranks


def _neighbor_matrix(order, k):
    """Boolean matrix: [i, j] is True iff j is among i's k nearest."""
    n = order.shape[0]
    nb = np.zeros((n, n), dtype=bool)
    nb[np.repeat(np.arange(n), k), order[:, :k].ravel()] = True
    return nb


def _check_sizes(d_in: DissimilarityMatrix, e: Embedding):
    if d_in.n != e.n:
        raise DimensionMismatch(f"Input has {d_in.n} points, embedding has {e.n}")


def knn_sets(d: DissimilarityMatrix, k):
    """
    k nearest other points for every point.

    Returns:
        list of frozensets of neighbor indices, one per point
    """
    _validate_k(k, d.n)
    order = _neighbor_order(d)
    return [frozenset(int(j) for j in row[:k]) for row in order]


def distortion_census(d_in: DissimilarityMatrix, e: Embedding, a: CoMembership, k):
    """
    Count tears and false neighborhoods among unordered pairs.

    A pair is a false neighborhood if, in at least one direction, one point
    is a k-neighbor of the other in the map but not in the input; a tear if
    the reverse holds. Pairs are split into within/between class by A.

    Returns:
        (fn_within, fn_between, tear_within, tear_between)
    """
    _check_sizes(d_in, e)
    if a.n != d_in.n:
        raise DimensionMismatch(f"Co-membership has {a.n} points, input has {d_in.n}")
    _validate_k(k, d_in.n)

    near_in = _neighbor_matrix(_neighbor_order(d_in), k)
    near_map = _neighbor_matrix(_neighbor_order(map_distances(e)), k)

    false_nb = near_map & ~near_in
    torn = near_in & ~near_map
    false_nb = np.triu(false_nb | false_nb.T, 1)
    torn = np.triu(torn | torn.T, 1)

    same = np.asarray(a.a, dtype=bool)
    return (
        int((false_nb & same).sum()),
        int((false_nb & ~same).sum()),
        int((torn & same).sum()),
        int((torn & ~same).sum()),
    )


def _rank_penalty(ranks, intruders, k):
    return float((ranks[intruders] - k).sum())


def _rank_normalizer(n, k):
    return 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0))


def trustworthiness(d_in: DissimilarityMatrix, e: Embedding, k):
    """1 minus the normalized input-rank excess of map neighbors that are not input neighbors."""
    _check_sizes(d_in, e)
    n = d_in.n
    _validate_k(k, n, below_half=True)

    order_in = _neighbor_order(d_in)
    near_in = _neighbor_matrix(order_in, k)
    near_map = _neighbor_matrix(_neighbor_order(map_distances(e)), k)
    penalty = _rank_penalty(_ranks(order_in), near_map & ~near_in, k)
    return 1.0 - _rank_normalizer(n, k) * penalty


def continuity(d_in: DissimilarityMatrix, e: Embedding, k):
    """1 minus the normalized map-rank excess of input neighbors that are not map neighbors."""
    _check_sizes(d_in, e)
    n = d_in.n
    _validate_k(k, n, below_half=True)

    order_map = _neighbor_order(map_distances(e))
    near_in = _neighbor_matrix(_neighbor_order(d_in), k)
    near_map = _neighbor_matrix(order_map, k)
    penalty = _rank_penalty(_ranks(order_map), near_in & ~near_map, k)
    return 1.0 - _rank_normalizer(n, k) * penalty


def knn_label_accuracy(e: Embedding, labels, k):
    """
    Leave-one-out k-NN vote on map coordinates.

    Returns:
        fraction of points whose majority neighbor label equals their own;
        ties go to the label of the lowest-index tied neighbor
    """
    labels = as_labels(labels)
    if len(labels) != e.n:
        raise SizeMismatch(f"{len(labels)} labels for {e.n} points")
    _validate_k(k, e.n)
    if len(set(labels.labels)) < 2:
        logger.warning("k-NN accuracy with a single class is trivially 1.0")

    tokens = labels.labels
    order = _neighbor_order(map_distances(e))
    correct = 0
    for i, row in enumerate(order[:, :k]):
        votes = Counter(tokens[j] for j in row)
        top = max(votes.values())
        tied = {label for label, count in votes.items() if count == top}
        winner = tokens[min(int(j) for j in row if tokens[j] in tied)]
        correct += winner == tokens[i]
    return correct / e.n


def default_k(n, requested=DEFAULT_NEIGHBORHOOD_SIZE):
    """Neighborhood size clamped to n - 1 and below n / 2."""
    k = min(requested, n - 1, (n - 1) // 2)
    if k < 1:
        raise InvalidK(f"No valid neighborhood size for n = {n}")
    return k


def evaluate_map(d_in: DissimilarityMatrix, e: Embedding, labels, k=None):
    """Compute the full MapQualityReport for an embedding of labeled input distances."""
    labels = as_labels(labels)
    if len(labels) != d_in.n:
        raise SizeMismatch(f"{len(labels)} labels for {d_in.n} points")
    k = default_k(d_in.n) if k is None else k

    fn_within, fn_between, tear_within, tear_between = distortion_census(
        d_in, e, co_membership(labels), k
    )
    report = MapQualityReport(
        k=int(k),
        trustworthiness=trustworthiness(d_in, e, k),
        continuity=continuity(d_in, e, k),
        knn_accuracy=knn_label_accuracy(e, labels, k),
        fn_within=fn_within,
        fn_between=fn_between,
        tear_within=tear_within,
        tear_between=tear_between,
    )
    logger.info(f"Map quality at k={k}: T={report.trustworthiness:.4f} "
                f"C={report.continuity:.4f} knn={report.knn_accuracy:.4f}")
    return report


def tear_between_fraction(report: MapQualityReport):
    """Share of tear pairs that join points of different classes."""
    tears = report.tear_within + report.tear_between
    return report.tear_between / tears if tears else 0.0


def configuration_diameter(points):
    """Largest pairwise Euclidean distance of a point set."""
    points = np.asarray(points, dtype=float)
    return float(pdist(points).max()) if len(points) > 1 else 0.0


def procrustes_align(reference, moving):
    """
    Align `moving` onto `reference` with translation, rotation/reflection
    and uniform scaling.

    Returns:
        (aligned points, RMS distance between aligned and reference points)
    """
    reference = np.asarray(reference, dtype=float)
    moving = np.asarray(moving, dtype=float)
    if reference.shape != moving.shape:
        raise DimensionMismatch(f"Shapes differ: {reference.shape} vs {moving.shape}")

    ref_center = reference.mean(axis=0)
    ref_c = reference - ref_center
    mov_c = moving - moving.mean(axis=0)

    rotation, singular_sum = orthogonal_procrustes(mov_c, ref_c)
    norm = float((mov_c ** 2).sum())
    scale = singular_sum / norm if norm > 0 else 1.0
    aligned = scale * mov_c @ rotation + ref_center
    rms = float(np.sqrt(((aligned - reference) ** 2).sum(axis=1).mean()))
    return aligned, rms

"""
LabelMap - Stress Functions
Local and total mapping stress, its gradient with respect to map
coordinates, and the Sammon-weighted / CCA-weighted variants.

Each unordered pair (i, j) contributes
    |d_ij - d*_ij|^p * w_ij
where w_ij = F(d_ij) for same-class pairs (Sammon-like, tolerates false
neighborhoods) and w_ij = F(d*_ij) for different-class pairs (CCA-like,
tolerates tears).
"""

from dataclasses import dataclass
from enum import Enum
from typing import List
import logging
import math

import numpy as np
from scipy.spatial.distance import pdist

from labelmap.config import COINCIDENT_JITTER_SCALE, DEFAULT_WORKERS, SLOPE_CAP
from labelmap.errors import DimensionMismatch, IndexOutOfRange, NegativeDistance
from labelmap.mapping.geometry import (
    CoMembership, DissimilarityMatrix, Embedding, check_dimensions, condensed, pairwise_stats
)
from labelmap.mapping.parallel import ordered_map_reduce
from labelmap.mapping.weighting import GAUSSIAN_TAIL, WeightFunction, WeightParams

logger = logging.getLogger(__name__)


class StressMode(str, Enum):
    CLASSIMAP = 'classimap'
    SAMMON = 'sammon'
    CCA = 'cca'


@dataclass(frozen=True)
class PairStressTerm:
    """Stress of one pair and the equal-and-opposite gradients on its endpoints."""
    i: int
    j: int
    value: float
    grad_i: np.ndarray
    grad_j: np.ndarray


def _weight_on_map(same, mode):
    """True where the pair weight is evaluated at the map distance d*."""
    mode = StressMode(mode)
    if mode is StressMode.SAMMON:
        return np.zeros(np.shape(same), dtype=bool)
    if mode is StressMode.CCA:
        return np.ones(np.shape(same), dtype=bool)
    return ~np.asarray(same, dtype=bool)


def pair_weights(dij, dstar, same, params, mode, weight=GAUSSIAN_TAIL):
    """Pair weights w_ij: F(d) or F(d*) depending on mode and co-membership."""
    on_map = _weight_on_map(same, mode)
    return np.where(on_map, weight.value(dstar, params), weight.value(dij, params))


def pair_values(dij, dstar, same, params, mode, weight=GAUSSIAN_TAIL):
    """Stress |d - d*|^p * w for a batch of pairs."""
    w = pair_weights(dij, dstar, same, params, mode, weight)
    return np.abs(dij - dstar) ** params.p * w


def _slope(absdiff, p):
    """p * |d - d*|^(p-1), zero at the kink, capped when p < 1."""
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        slope = np.where(absdiff > 0, p * np.power(absdiff, p - 1.0), 0.0)
    if p < 1:
        slope = np.minimum(slope, SLOPE_CAP)
    return slope


def pair_coefficients(dij, dstar, same, params, mode, weight=GAUSSIAN_TAIL,
                      simplified_cca=False):
    """
    Derivative of each pair's stress with respect to its map distance d*.

    The pair gradient on point i is coef * (y_i - y_j) / d*, and the
    opposite on point j. sign(0) = 0 at the d == d* kink.
    """
    diff = dij - dstar
    absdiff = np.abs(diff)
    on_map = _weight_on_map(same, mode)
    w = np.where(on_map, weight.value(dstar, params), weight.value(dij, params))
    coef = -np.sign(diff) * _slope(absdiff, params.p) * w
    if not simplified_cca:
        coef = coef + np.where(on_map, absdiff ** params.p * weight.derivative(dstar, params), 0.0)
    return coef


def jitter_direction(i, j):
    """Deterministic pseudo-random unit vector for the pair {i, j}, pointing from lower to higher index."""
    rng = np.random.default_rng([min(i, j), max(i, j)])
    angle = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([math.cos(angle), math.sin(angle)])


class StressModel:
    """
    Stress of a fixed dataset (distances, co-membership, mode) as a
    function of map coordinates. Caches the pair layout so the optimizer
    can evaluate it repeatedly.
    """

    def __init__(self, d: DissimilarityMatrix, a: CoMembership, mode=StressMode.CLASSIMAP,
                 weight: WeightFunction = GAUSSIAN_TAIL, simplified_cca=False,
                 workers=DEFAULT_WORKERS):
        if d.n != a.n:
            raise DimensionMismatch(f"Inconsistent sizes: distances {d.n}, co-membership {a.n}")
        self.d = d
        self.a = a
        self.mode = StressMode(mode)
        self.weight = weight
        self.simplified_cca = simplified_cca
        self.workers = workers

        self.rows, self.cols = np.triu_indices(d.n, k=1)
        self.dij = condensed(d)
        self.same = a.a[self.rows, self.cols]
        self.mean_distance, _ = pairwise_stats(d)
        self.jitter_magnitude = COINCIDENT_JITTER_SCALE * self.mean_distance

    @property
    def n(self):
        return self.d.n

    def _check(self, e: Embedding):
        check_dimensions(e, self.d, self.a)

    def total(self, e: Embedding, params: WeightParams):
        """Sum of pair stresses over i < j."""
        self._check(e)
        dstar = pdist(e.y)

        def block(sl):
            values = pair_values(self.dij[sl], dstar[sl], self.same[sl], params,
                                 self.mode, self.weight)
            return float(values.sum())

        return ordered_map_reduce(block, len(self.dij), self.workers)

    def normalized(self, e: Embedding, params: WeightParams):
        """Raw stress divided by sum of w_ij * d_ij^p."""
        self._check(e)
        dstar = pdist(e.y)
        w = pair_weights(self.dij, dstar, self.same, params, self.mode, self.weight)
        raw = float((np.abs(self.dij - dstar) ** params.p * w).sum())
        scale = float((w * self.dij ** params.p).sum())
        return raw / scale if scale > 0 else 0.0

    def breakdown(self, e: Embedding, params: WeightParams):
        """(within-class, between-class) parts of the total stress."""
        self._check(e)
        values = pair_values(self.dij, pdist(e.y), self.same, params, self.mode, self.weight)
        return float(values[self.same].sum()), float(values[~self.same].sum())

    def gradient(self, e: Embedding, params: WeightParams):
        """Analytic n x 2 gradient of the total stress."""
        self._check(e)
        y = e.y
        n = self.n
        dstar_all = pdist(y)

        def block(sl):
            rows, cols = self.rows[sl], self.cols[sl]
            r = y[rows] - y[cols]
            dstar = dstar_all[sl]
            dij = self.dij[sl]
            coef = pair_coefficients(dij, dstar, self.same[sl], params, self.mode,
                                     self.weight, self.simplified_cca)
            forces = np.zeros_like(r)
            apart = dstar > 0
            forces[apart] = (coef[apart] / dstar[apart])[:, None] * r[apart]

            for k in np.flatnonzero(~apart & (dij > 0)):
                forces[k] = self.jitter_magnitude * jitter_direction(rows[k], cols[k])

            grad = np.zeros((n, 2))
            for axis in range(2):
                grad[:, axis] = (np.bincount(rows, forces[:, axis], minlength=n)
                                 - np.bincount(cols, forces[:, axis], minlength=n))
            return grad

        return ordered_map_reduce(block, len(self.dij), self.workers)

    def anchor_gradient(self, y: np.ndarray, anchor: int, params: WeightParams):
        """
        Gradient of the pairs (anchor, j) with respect to every y_j.
        The anchor row is zero: only the other points move.
        """
        r = y - y[anchor]
        dstar = np.hypot(r[:, 0], r[:, 1])
        dij = self.d.d[anchor]
        coef = pair_coefficients(dij, dstar, self.a.a[anchor], params, self.mode,
                                 self.weight, self.simplified_cca)
        grad = np.zeros_like(y)
        apart = dstar > 0
        apart[anchor] = False
        grad[apart] = (coef[apart] / dstar[apart])[:, None] * r[apart]

        coincident = np.flatnonzero((dstar == 0) & (dij > 0))
        if len(coincident):
            logger.debug(f"{len(coincident)} points coincide with anchor {anchor}")
        for j in coincident:
            u = jitter_direction(anchor, j)
            # push the higher index along u, the lower against it
            grad[j] = -self.jitter_magnitude * u if j > anchor else self.jitter_magnitude * u
        return grad

    def anchor_step(self, y: np.ndarray, anchor: int, params: WeightParams, rate):
        """
        Displacement of every point for one anchor update.

        Each point moves by -rate times its anchor gradient, which is radial
        about the anchor. A move toward the input distance stops where the
        pair's distance error vanishes.
        """
        step = -rate * self.anchor_gradient(y, anchor, params)
        r = y - y[anchor]
        dstar = np.hypot(r[:, 0], r[:, 1])
        error = self.d.d[anchor] - dstar

        apart = dstar > 0
        apart[anchor] = False
        radial = np.zeros(self.n)
        with np.errstate(invalid='ignore', over='ignore'):
            radial[apart] = np.einsum('ij,ij->i', step[apart], r[apart]) / dstar[apart]
        overshoot = (apart & np.isfinite(radial) & (radial * error > 0)
                     & (np.abs(radial) > np.abs(error)))
        step[overshoot] *= (error[overshoot] / radial[overshoot])[:, None]
        return step

    def pair_terms(self, e: Embedding, params: WeightParams) -> List[PairStressTerm]:
        """Per-pair values and gradients, for diagnostics on small inputs."""
        self._check(e)
        y = e.y
        r = y[self.rows] - y[self.cols]
        dstar = pdist(y)
        values = pair_values(self.dij, dstar, self.same, params, self.mode, self.weight)
        coef = pair_coefficients(self.dij, dstar, self.same, params, self.mode,
                                 self.weight, self.simplified_cca)
        terms = []
        for k, (i, j) in enumerate(zip(self.rows, self.cols)):
            if dstar[k] > 0:
                g = coef[k] / dstar[k] * r[k]
            elif self.dij[k] > 0:
                g = self.jitter_magnitude * jitter_direction(i, j)
            else:
                g = np.zeros(2)
            terms.append(PairStressTerm(int(i), int(j), float(values[k]), g, -g))
        return terms


def local_stress(i, j, d: DissimilarityMatrix, dstar, a: CoMembership, params: WeightParams,
                 mode=StressMode.CLASSIMAP, weight: WeightFunction = GAUSSIAN_TAIL):
    """
    Stress of a single pair at map distance dstar.

    Returns:
        |d_ij - dstar|^p * (A_ij F(d_ij) + (1 - A_ij) F(dstar)) in classimap mode;
        the F(d) or F(dstar) weighting alone in sammon / cca mode
    """
    n = d.n
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise IndexOutOfRange(f"Invalid pair ({i}, {j}) for n = {n}")
    if dstar < 0:
        raise NegativeDistance(f"Map distance must be nonnegative, got {dstar}")
    value = pair_values(np.array([d.d[i, j]]), np.array([float(dstar)]),
                        np.array([bool(a.a[i, j])]), params, mode, weight)
    return float(value[0])


def total_stress(e: Embedding, d: DissimilarityMatrix, a: CoMembership, params: WeightParams,
                 mode=StressMode.CLASSIMAP, weight: WeightFunction = GAUSSIAN_TAIL,
                 workers=DEFAULT_WORKERS):
    """Sum of local stresses over all unordered pairs i < j."""
    check_dimensions(e, d, a)
    return StressModel(d, a, mode, weight, workers=workers).total(e, params)


def normalized_stress(e: Embedding, d: DissimilarityMatrix, a: CoMembership,
                      params: WeightParams, mode=StressMode.CLASSIMAP,
                      weight: WeightFunction = GAUSSIAN_TAIL):
    """Total stress divided by sum of w_ij * d_ij^p, for cross-dataset comparison."""
    check_dimensions(e, d, a)
    return StressModel(d, a, mode, weight).normalized(e, params)


def stress_breakdown(e: Embedding, d: DissimilarityMatrix, a: CoMembership,
                     params: WeightParams, mode=StressMode.CLASSIMAP):
    """Total stress split into (within-class, between-class) pair sums."""
    check_dimensions(e, d, a)
    return StressModel(d, a, mode).breakdown(e, params)


def stress_gradient(e: Embedding, d: DissimilarityMatrix, a: CoMembership,
                    params: WeightParams, mode=StressMode.CLASSIMAP,
                    weight: WeightFunction = GAUSSIAN_TAIL, simplified_cca=False,
                    workers=DEFAULT_WORKERS):
    """Analytic n x 2 gradient of total_stress with respect to the coordinates."""
    check_dimensions(e, d, a)
    model = StressModel(d, a, mode, weight, simplified_cca=simplified_cca, workers=workers)
    return model.gradient(e, params)


def pair_terms(e: Embedding, d: DissimilarityMatrix, a: CoMembership, params: WeightParams,
               mode=StressMode.CLASSIMAP):
    """All PairStressTerm records for i < j."""
    check_dimensions(e, d, a)
    return StressModel(d, a, mode).pair_terms(e, params)

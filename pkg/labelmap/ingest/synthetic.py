"""
LabelMap - Synthetic Datasets
Seeded desk-scale datasets with known structure: two overlapping
Gaussian classes, and points on a 2-D plane embedded isometrically in a
higher-dimensional space.
"""

from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np
import pandas as pd

from labelmap.config import DEFAULT_SEED
from labelmap.errors import DegenerateInput, InvalidConfig

logger = logging.getLogger(__name__)

LABEL_COLUMN = 'label'


@dataclass
class SyntheticDataset:
    points: np.ndarray
    labels: tuple
    plane: Optional[np.ndarray] = None

    def to_frame(self):
        """Feature table: columns f0..f{dim-1} followed by the label column."""
        frame = pd.DataFrame(self.points, columns=[f"f{i}" for i in range(self.points.shape[1])])
        frame[LABEL_COLUMN] = list(self.labels)
        return frame

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
        logger.info(f"Wrote {len(self.labels)} synthetic points to {path}")


def overlapping_gaussians(n=200, dim=5, separation=1.0, seed=DEFAULT_SEED):
    """
    Two isotropic unit-variance Gaussian classes 'A' and 'B' whose means
    are `separation` standard deviations apart along the first axis.
    """
    if n < 4:
        raise DegenerateInput(f"Need at least 4 points, got {n}")
    if dim < 1:
        raise InvalidConfig(f"dim must be >= 1, got {dim}")

    rng = np.random.default_rng(seed)
    n_a = n // 2
    points = rng.standard_normal((n, dim))
    points[n_a:, 0] += separation
    labels = ('A',) * n_a + ('B',) * (n - n_a)
    return SyntheticDataset(points, labels)


def planted_plane(n=100, ambient_dim=8, seed=DEFAULT_SEED):
    """
    Points uniform in the unit square, mapped into `ambient_dim`
    dimensions by a random orthonormal 2-frame plus offset, so ambient
    Euclidean distances equal plane distances.

    Labels split the square in half along its first coordinate.
    """
    if n < 3:
        raise DegenerateInput(f"Need at least 3 points, got {n}")
    if ambient_dim < 2:
        raise InvalidConfig(f"ambient_dim must be >= 2, got {ambient_dim}")

    rng = np.random.default_rng(seed)
    plane = rng.uniform(0.0, 1.0, size=(n, 2))
    frame, _ = np.linalg.qr(rng.standard_normal((ambient_dim, 2)))
    offset = rng.standard_normal(ambient_dim)
    points = plane @ frame.T + offset
    labels = tuple('left' if x < 0.5 else 'right' for x in plane[:, 0])
    return SyntheticDataset(points, labels, plane=plane)

import numpy as np
import pytest

from labelmap.mapping.geometry import DissimilarityMatrix, Embedding, co_membership


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def plane_points(rng):
    """Random 2-D points whose own coordinates are a perfect map."""
    return rng.uniform(0.0, 10.0, size=(12, 2))


@pytest.fixture
def plane_instance(plane_points):
    labels = ['a'] * 6 + ['b'] * 6
    d = DissimilarityMatrix.from_points(plane_points)
    return d, Embedding(plane_points), labels, co_membership(labels)


@pytest.fixture
def feature_csv(tmp_path):
    """Two separated 2-D clusters as a feature CSV with a 'label' column."""
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 0.3, size=(10, 2))
    b = rng.normal(5.0, 0.3, size=(10, 2))
    lines = ['x,y,label']
    for (x, y), label in zip(np.vstack([a, b]), ['a'] * 10 + ['b'] * 10):
        lines.append(f"{float(x)!r},{float(y)!r},{label}")
    path = tmp_path / 'features.csv'
    path.write_text('\n'.join(lines) + '\n')
    return path

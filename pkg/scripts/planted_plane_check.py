#!/usr/bin/env python3
"""
LabelMap - Planted Plane Recovery Check
Sample points on a 2-D plane embedded in a higher-dimensional space, map
them, and measure stress reduction and Procrustes error against the plane.

Usage:
    python scripts/planted_plane_check.py [--seeds 10] [--n 100] [--dim 8] [--init random] [--classes one]
"""

import sys
import argparse
import logging
import time
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from labelmap.config import LOG_FORMAT
from labelmap.ingest.synthetic import planted_plane
from labelmap.mapping.geometry import DissimilarityMatrix
from labelmap.mapping.metrics import configuration_diameter, procrustes_align
from labelmap.mapping.optimizer import InitMethod, OptimizerConfig, StressOptimizer


def check_seed(seed, n, dim, epochs, init, classes):
    """
    Returns:
        dict with stress ratio (final / initial), relative Procrustes RMS
        and run time
    """
    dataset = planted_plane(n, dim, seed)
    d = DissimilarityMatrix.from_points(dataset.points)
    labels = dataset.labels if classes == 'two' else ('plane',) * n
    config = OptimizerConfig(epochs=epochs, seed=seed, init=init)

    started = time.perf_counter()
    embedding, trace = StressOptimizer(d, labels, config).run()
    elapsed = time.perf_counter() - started

    _, rms = procrustes_align(dataset.plane, embedding.y)
    return {
        'stress_ratio': trace.best_selection_stress / trace.initial_selection_stress,
        'relative_rms': rms / configuration_diameter(dataset.plane),
        'seconds': elapsed,
    }


def main():
    parser = argparse.ArgumentParser(description='Planted plane recovery check')
    parser.add_argument('--seeds', type=int, default=10)
    parser.add_argument('--n', type=int, default=100)
    parser.add_argument('--dim', type=int, default=8, help='Ambient dimension')
    parser.add_argument('--epochs', type=int, default=200)
    parser.add_argument('--init', choices=[m.value for m in InitMethod],
                        default=InitMethod.RANDOM_GAUSSIAN.value)
    parser.add_argument('--classes', choices=['one', 'two'], default='one',
                        help='Label every point alike, or keep the two half-plane classes')
    parser.add_argument('--verbose', '-v', action='store_true', help='Verbose logging')
    args = parser.parse_args()

    log_level = logging.DEBUG if args.verbose else logging.WARNING
    logging.basicConfig(level=log_level, format=LOG_FORMAT)

    passed = 0
    for seed in range(args.seeds):
        result = check_seed(seed, args.n, args.dim, args.epochs, args.init, args.classes)
        ok = result['stress_ratio'] <= 0.01 and result['relative_rms'] <= 0.05
        passed += ok
        print(f"seed {seed}: stress ratio {result['stress_ratio']:.2e}, "
              f"rms/diameter {result['relative_rms']:.4f}, {result['seconds']:.1f}s "
              f"{'OK' if ok else 'FAIL'}")

    print(f"\n{passed}/{args.seeds} seeds recovered the plane")
    sys.exit(0 if passed >= max(args.seeds - 1, 1) else 1)


if __name__ == '__main__':
    main()

#!/usr/bin/env python3
"""
LabelMap - Tear Placement Comparison
Map two overlapping Gaussian classes with ClassiMap and the Sammon-weighted
baseline over several seeds, and report the between-class share of tears.

Usage:
    python scripts/compare_methods.py [--seeds 10] [--n 200] [--epochs 200]
"""

import sys
import argparse
import logging
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from labelmap.config import LOG_FORMAT
from labelmap.ingest.synthetic import overlapping_gaussians
from labelmap.mapping.geometry import DissimilarityMatrix
from labelmap.mapping.metrics import evaluate_map, tear_between_fraction
from labelmap.mapping.optimizer import OptimizerConfig, StressOptimizer
from labelmap.mapping.stress import StressMode


def compare_seed(seed, n, dim, separation, epochs, k, workers):
    """Between-class tear fraction for (classimap, sammon) on one seeded dataset."""
    dataset = overlapping_gaussians(n, dim, separation, seed)
    d = DissimilarityMatrix.from_points(dataset.points)

    fractions = {}
    for mode in (StressMode.CLASSIMAP, StressMode.SAMMON):
        config = OptimizerConfig(epochs=epochs, seed=seed, mode=mode, workers=workers)
        embedding, _ = StressOptimizer(d, dataset.labels, config).run()
        report = evaluate_map(d, embedding, dataset.labels, k)
        fractions[mode] = tear_between_fraction(report)
    return fractions[StressMode.CLASSIMAP], fractions[StressMode.SAMMON]


def main():
    parser = argparse.ArgumentParser(description='Compare tear placement of ClassiMap and Sammon weighting')
    parser.add_argument('--seeds', type=int, default=10, help='Number of seeds (0..seeds-1)')
    parser.add_argument('--n', type=int, default=200, help='Points per dataset')
    parser.add_argument('--dim', type=int, default=5, help='Feature dimension')
    parser.add_argument('--separation', type=float, default=1.0,
                        help='Class mean separation in standard deviations')
    parser.add_argument('--epochs', type=int, default=200)
    parser.add_argument('--k', type=int, default=10)
    parser.add_argument('--workers', type=int, default=1)
    parser.add_argument('--verbose', '-v', action='store_true', help='Verbose logging')
    args = parser.parse_args()

    log_level = logging.DEBUG if args.verbose else logging.WARNING
    logging.basicConfig(level=log_level, format=LOG_FORMAT)
    logger = logging.getLogger('compare_methods')

    wins = 0
    print(f"{'seed':>4}  {'classimap':>10}  {'sammon':>10}")
    for seed in range(args.seeds):
        classimap, sammon = compare_seed(seed, args.n, args.dim, args.separation,
                                         args.epochs, args.k, args.workers)
        wins += classimap >= sammon
        print(f"{seed:>4}  {classimap:>10.4f}  {sammon:>10.4f}")
        logger.info(f"Seed {seed}: classimap={classimap:.4f} sammon={sammon:.4f}")

    print(f"\nClassiMap between-class tear share >= Sammon on {wins}/{args.seeds} seeds")


if __name__ == '__main__':
    main()

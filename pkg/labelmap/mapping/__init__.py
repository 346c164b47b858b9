"""Mapping modules - distances, weighting, stress, optimizer and quality metrics."""

from labelmap.mapping.geometry import (
    DissimilarityMatrix,
    Embedding,
    LabelVector,
    co_membership,
)
from labelmap.mapping.metrics import MapQualityReport, evaluate_map
from labelmap.mapping.optimizer import OptimizerConfig, RunTrace, StressOptimizer, run
from labelmap.mapping.stress import StressMode

"""
LabelMap - Annealed Stress Optimizer
Minimize the selected stress over 2-D embeddings with anchor-point
stochastic updates, a linear lambda schedule and a geometric learning
rate decay, starting from a seeded initialization.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional
import logging
import time

import numpy as np
from scipy.linalg import eigh

from labelmap.config import (
    DEFAULT_EPOCHS, DEFAULT_LAMBDA_END, DEFAULT_LAMBDA_START, DEFAULT_SEED,
    DEFAULT_STRESS_EXPONENT, DEFAULT_WORKERS, EIGENVALUE_TOLERANCE,
    LEARNING_RATE_END_FACTOR, LEARNING_RATE_START_FACTOR, RANDOM_INIT_SCALE
)
from labelmap.errors import (
    DegenerateInput, InvalidConfig, InvalidLambda, InvalidSchedule, NonFiniteUpdate, SizeMismatch
)
from labelmap.mapping.geometry import (
    DissimilarityMatrix, Embedding, as_labels, co_membership, pairwise_stats
)
from labelmap.mapping.stress import StressMode, StressModel
from labelmap.mapping.weighting import GAUSSIAN_TAIL, lambda_at, weight_params

logger = logging.getLogger(__name__)


class InitMethod(str, Enum):
    CLASSICAL_MDS = 'mds'
    RANDOM_GAUSSIAN = 'random'


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Run settings. steps_per_epoch defaults to n; learning rates default to
    0.5 * mean(d) and 0.01 * mean(d).
    """
    epochs: int = DEFAULT_EPOCHS
    steps_per_epoch: Optional[int] = None
    learning_rate_start: Optional[float] = None
    learning_rate_end: Optional[float] = None
    lambda_start: float = DEFAULT_LAMBDA_START
    lambda_end: float = DEFAULT_LAMBDA_END
    p: float = DEFAULT_STRESS_EXPONENT
    seed: int = DEFAULT_SEED
    init: InitMethod = InitMethod.CLASSICAL_MDS
    mode: StressMode = StressMode.CLASSIMAP
    simplified_cca_gradient: bool = False
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        object.__setattr__(self, 'init', InitMethod(self.init))
        object.__setattr__(self, 'mode', StressMode(self.mode))
        self.validate()

    def validate(self):
        if self.epochs < 1:
            raise InvalidSchedule(f"epochs must be >= 1, got {self.epochs}")
        if self.steps_per_epoch is not None and self.steps_per_epoch < 1:
            raise InvalidSchedule(f"steps_per_epoch must be >= 1, got {self.steps_per_epoch}")
        for name in ('lambda_start', 'lambda_end'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidLambda(f"{name} must be in [0, 1], got {value}")
        for name in ('learning_rate_start', 'learning_rate_end'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InvalidConfig(f"{name} must be positive, got {value}")
        if not self.p > 0:
            raise InvalidConfig(f"p must be positive, got {self.p}")
        if self.workers < 1:
            raise InvalidConfig(f"workers must be >= 1, got {self.workers}")

    @property
    def horizon(self):
        """Number of schedule intervals: the last epoch runs at lambda_end."""
        return max(self.epochs - 1, 1)

    def learning_rates(self, mean_distance):
        """Resolved (start, end) learning rates for a dataset."""
        scale = mean_distance if mean_distance > 0 else 1.0
        start = self.learning_rate_start or LEARNING_RATE_START_FACTOR * scale
        end = self.learning_rate_end or LEARNING_RATE_END_FACTOR * scale
        return start, end


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lam: float
    learning_rate: float
    total_stress: float


@dataclass
class RunTrace:
    """Per-epoch history of a run plus the selection bookkeeping."""
    records: List[EpochRecord] = field(default_factory=list)
    embedding: Optional[Embedding] = None
    duration: float = 0.0
    initial_stress: float = 0.0
    initial_selection_stress: float = 0.0
    best_epoch: int = -1
    best_selection_stress: float = 0.0
    last_selection_stress: float = 0.0

    def to_text(self, metadata=None):
        """
        Line-oriented trace: '#'-prefixed metadata, then one
        tab-separated record per epoch (epoch, lambda, learning_rate, total_stress).
        """
        lines = []
        for key, value in (metadata or {}).items():
            lines.append(f"# {key}={value}")
        lines.append(f"# best_epoch={self.best_epoch}")
        lines.append("# epoch\tlambda\tlearning_rate\ttotal_stress")
        for rec in self.records:
            lines.append(f"{rec.epoch}\t{rec.lam!r}\t{rec.learning_rate!r}\t{rec.total_stress!r}")
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text):
        """Parse the records written by to_text; metadata lines are skipped."""
        trace = cls()
        for line in text.splitlines():
            if not line.strip() or line.startswith('#'):
                if line.startswith('# best_epoch='):
                    trace.best_epoch = int(line.split('=', 1)[1])
                continue
            epoch, lam, rate, stress = line.split('\t')
            trace.records.append(EpochRecord(int(epoch), float(lam), float(rate), float(stress)))
        return trace


def anneal_state(epoch, config: OptimizerConfig, stats):
    """
    WeightParams for an epoch: lambda from the linear schedule, then mu and
    sigma from the input distance statistics. Indices past the last epoch
    are clamped, so epoch == config.epochs yields lambda_end.
    """
    if not 0 <= epoch <= config.epochs:
        raise InvalidSchedule(f"epoch {epoch} outside [0, {config.epochs}]")
    step = min(epoch, config.horizon)
    lam = lambda_at(step, config.horizon, config.lambda_start, config.lambda_end)
    return weight_params(stats, lam, config.p)


def _random_gaussian(n, mean_distance, rng):
    scale = RANDOM_INIT_SCALE * (mean_distance if mean_distance > 0 else 1.0)
    return rng.normal(0.0, scale, size=(n, 2))


def classical_mds(d: DissimilarityMatrix):
    """
    Top-2 classical MDS coordinates of the double-centered squared distances.

    Returns:
        n x 2 array, or None when the input has no positive leading
        eigenvalues (strongly non-Euclidean)
    """
    n = d.n
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d.d ** 2) @ j
    b = 0.5 * (b + b.T)

    evals, evecs = eigh(b, subset_by_index=[n - 2, n - 1])
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    top = evals[0]
    if top <= 0:
        return None
    tolerance = EIGENVALUE_TOLERANCE * abs(top)
    if evals[1] < -tolerance:
        return None
    evals = np.where(np.abs(evals) <= tolerance, 0.0, evals)

    # fix eigenvector signs: largest-magnitude component positive
    pivots = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[pivots, np.arange(evecs.shape[1])])
    signs[signs == 0] = 1.0
    return evecs * signs * np.sqrt(evals)


def initialize(d: DissimilarityMatrix, config: OptimizerConfig, rng=None) -> Embedding:
    """Starting embedding: classical MDS (with random fallback) or seeded Gaussian."""
    if d.n < 2:
        raise DegenerateInput(f"Need at least 2 points, got {d.n}")
    if rng is None:
        rng = _streams(config.seed)[0]
    mean_distance, _ = pairwise_stats(d)

    if config.init is InitMethod.CLASSICAL_MDS:
        coords = classical_mds(d)
        if coords is not None:
            logger.info("Initialized with classical MDS")
            return Embedding(coords)
        logger.warning("Classical MDS has non-positive leading eigenvalues "
                       "(non-Euclidean input); falling back to random initialization")

    logger.info(f"Initialized with random Gaussian coordinates (seed {config.seed})")
    return Embedding(_random_gaussian(d.n, mean_distance, rng))


def _streams(seed):
    """Independent generators for initialization and anchor sampling."""
    init_seq, anchor_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_seq), np.random.default_rng(anchor_seq)


class StressOptimizer:
    """Run the annealed anchor-point descent for one dataset and config."""

    def __init__(self, d: DissimilarityMatrix, labels, config: OptimizerConfig,
                 weight=GAUSSIAN_TAIL):
        labels = as_labels(labels)
        if len(labels) != d.n:
            raise SizeMismatch(f"{len(labels)} labels for {d.n} points")
        self.d = d
        self.labels = labels
        self.config = config
        self.stats = pairwise_stats(d)
        self.model = StressModel(d, co_membership(labels), config.mode, weight,
                                 simplified_cca=config.simplified_cca_gradient,
                                 workers=config.workers)
        self.steps_per_epoch = config.steps_per_epoch or d.n
        self.lr_start, self.lr_end = config.learning_rates(self.stats[0])

    def learning_rate(self, epoch):
        """Geometric decay from lr_start (epoch 0) to lr_end (last epoch)."""
        fraction = min(epoch, self.config.horizon) / self.config.horizon
        if self.config.epochs == 1:
            fraction = 0.0
        return self.lr_start * (self.lr_end / self.lr_start) ** fraction

    def run(self):
        """
        Execute every epoch and return the best embedding.

        Returns:
            (Embedding, RunTrace); the embedding minimizes the stress under
            the final-epoch weighting among the initialization and all
            epoch-end embeddings
        """
        config = self.config
        started = time.perf_counter()
        init_rng, anchor_rng = _streams(config.seed)

        embedding = initialize(self.d, config, init_rng)
        final_params = anneal_state(config.epochs, config, self.stats)

        trace = RunTrace()
        trace.initial_stress = self.model.total(embedding, anneal_state(0, config, self.stats))
        best = embedding.copy()
        best_score = self.model.total(embedding, final_params)
        trace.initial_selection_stress = best_score
        trace.best_selection_stress = best_score
        trace.last_selection_stress = best_score

        logger.info(f"Starting {config.mode.value} run: n={self.d.n}, epochs={config.epochs}, "
                    f"steps/epoch={self.steps_per_epoch}, seed={config.seed}, "
                    f"workers={config.workers}")
        report_every = max(config.epochs // 10, 1)

        y = embedding.y
        for epoch in range(config.epochs):
            params = anneal_state(epoch, config, self.stats)
            rate = self.learning_rate(epoch)

            anchors = anchor_rng.integers(0, self.d.n, size=self.steps_per_epoch)
            for anchor in anchors:
                y += self.model.anchor_step(y, int(anchor), params, rate)
                if not np.all(np.isfinite(y)):
                    trace.duration = time.perf_counter() - started
                    raise NonFiniteUpdate(
                        f"Non-finite coordinates at epoch {epoch} (anchor {anchor})", trace
                    )

            stress = self.model.total(embedding, params)
            trace.records.append(EpochRecord(epoch, params.lam, rate, stress))

            score = stress if params == final_params else self.model.total(embedding, final_params)
            trace.last_selection_stress = score
            if score < best_score:
                best_score = score
                best = embedding.copy()
                trace.best_epoch = epoch

            logger.debug(f"epoch {epoch}: lambda={params.lam:.4f} lr={rate:.4g} "
                         f"stress={stress:.6g} selection={score:.6g}")
            if (epoch + 1) % report_every == 0:
                logger.info(f"Epoch {epoch + 1}/{config.epochs}: stress={stress:.6g}")

        trace.best_selection_stress = best_score
        trace.embedding = best
        trace.duration = time.perf_counter() - started
        logger.info(f"Run finished in {trace.duration:.2f}s: best epoch {trace.best_epoch} "
                    f"(selection stress {best_score:.6g}), last epoch selection stress "
                    f"{trace.last_selection_stress:.6g}")
        return best, trace


def run(d: DissimilarityMatrix, labels, config: OptimizerConfig = None, weight=GAUSSIAN_TAIL):
    """Convenience function to run the optimizer with a fresh StressOptimizer."""
    config = config or OptimizerConfig()
    return StressOptimizer(d, labels, config, weight).run()


"""
LabelMap - Neighborhood Weighting
Gaussian-tail weighting function F and its lambda-dependent parameters.

F(x) = 1 - Phi((x - mu) / sigma), with
    mu    = mean(d) - 2 (1 - lambda) std(d)
    sigma = |-2 lambda std(d)|
Large lambda gives a wide, global weighting; small lambda keeps only
small distances.
"""

from dataclasses import dataclass
from typing import Callable
import math

import numpy as np
from scipy.special import ndtr

from labelmap.config import DEFAULT_LAMBDA_END, DEFAULT_LAMBDA_START, SIGMA_EPSILON
from labelmap.errors import InvalidConfig, InvalidLambda, InvalidSchedule

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class WeightParams:
    """Parameters of F at one annealing step."""
    lam: float
    mu: float
    sigma: float
    p: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidLambda(f"lambda must be in [0, 1], got {self.lam}")
        if not self.sigma > 0:
            raise InvalidConfig(f"sigma must be positive, got {self.sigma}")
        if not self.p > 0:
            raise InvalidConfig(f"p must be positive, got {self.p}")


def weight_params(stats, lam, p=1.0):
    """
    Derive WeightParams from input distance statistics.

    Args:
        stats: (mean, std) of the input distances
        lam: annealing parameter in [0, 1]
        p: stress exponent

    Returns:
        WeightParams; sigma is clamped to a tiny positive scale when
        std == 0 or lam == 0
    """
    mean, std = stats
    if not 0.0 <= lam <= 1.0:
        raise InvalidLambda(f"lambda must be in [0, 1], got {lam}")
    if std < 0:
        raise InvalidConfig(f"std must be nonnegative, got {std}")

    mu = mean - 2.0 * (1.0 - lam) * std
    sigma = abs(-2.0 * lam * std)
    if sigma <= 0:
        sigma = SIGMA_EPSILON * max(mean, 1.0)
    return WeightParams(lam=float(lam), mu=float(mu), sigma=float(sigma), p=float(p))


def weight_f(x, params: WeightParams):
    """Gaussian upper tail 1 - Phi((x - mu) / sigma); accepts scalars or arrays."""
    return ndtr((params.mu - np.asarray(x, dtype=float)) / params.sigma)


def weight_f_derivative(x, params: WeightParams):
    """dF/dx: minus the Gaussian density with mean mu and scale sigma."""
    z = (np.asarray(x, dtype=float) - params.mu) / params.sigma
    return -np.exp(-0.5 * z * z) / (params.sigma * SQRT_2PI)


@dataclass(frozen=True)
class WeightFunction:
    """A weighting function and its derivative, both taking (x, params)."""
    value: Callable
    derivative: Callable


GAUSSIAN_TAIL = WeightFunction(value=weight_f, derivative=weight_f_derivative)


def lambda_at(step, total_steps, lambda_start=DEFAULT_LAMBDA_START,
              lambda_end=DEFAULT_LAMBDA_END):
    """Linear lambda schedule from lambda_start (step 0) to lambda_end (step == total_steps)."""
    if total_steps < 1:
        raise InvalidSchedule(f"total_steps must be >= 1, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise InvalidSchedule(f"step {step} outside [0, {total_steps}]")
    if step == total_steps:
        return float(lambda_end)
    return lambda_start + (step / total_steps) * (lambda_end - lambda_start)

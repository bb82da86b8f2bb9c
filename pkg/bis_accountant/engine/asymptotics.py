"""
Asymptotic privacy-loss expressions and Gaussian mechanism baselines
Low-noise and high-noise limits of the BIS privacy loss, plus the analytic delta of a shifted Gaussian pair
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from bis_accountant.engine.likelihood import log_binomial
from bis_accountant.engine.sampling import ParticipationVector
from bis_accountant.models.schemas import MechanismShape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BisMoments:
    """Mean and covariance of the BIS participation vector"""
    T: int
    k: int
    p: float
    scale: float

    @property
    def mu(self) -> np.ndarray:
        return np.full(self.T, self.p)

    @property
    def covariance(self) -> np.ndarray:
        """scale * (I - 11^T / T)"""
        return self.scale * (np.eye(self.T) - np.full((self.T, self.T), 1.0 / self.T))

    @property
    def trace(self) -> float:
        return self.T * self.p * (1.0 - self.p)

    def quadratic_form(self, w: np.ndarray) -> np.ndarray:
        """w^T Sigma w without forming Sigma; accepts one vector or a batch of rows"""
        w = np.asarray(w, dtype=np.float64)
        return self.scale * (np.sum(w * w, axis=-1) - np.sum(w, axis=-1) ** 2 / self.T)


def bis_moments(shape: MechanismShape) -> BisMoments:
    T, k = shape.T, shape.k
    p = k / T
    scale = 0.0 if k == T else T * p * (1.0 - p) / (T - 1)
    return BisMoments(T=T, k=k, p=p, scale=scale)


def full_batch_sensitivity(shape: MechanismShape) -> float:
    """L2 norm of the mean participation vector (k/T) * 1"""
    return shape.k / math.sqrt(shape.T)


def low_noise_loss(x: ParticipationVector, w: np.ndarray, sigma: float, shape: MechanismShape) -> float:
    """Privacy loss dominated by the sampled participation vector: k/(2 sigma^2) + <x, w>/sigma - log C(T, k)"""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    w = np.asarray(w, dtype=np.float64)
    inner = float(np.sum(w[np.asarray(x.indices, dtype=np.int64) - 1]))
    return shape.k / (2.0 * sigma**2) + inner / sigma - log_binomial(shape.T, shape.k)


def high_noise_loss(w: np.ndarray, sigma: float, moments: BisMoments, shape: MechanismShape) -> float:
    """Second-order expansion <mu, w>/sigma + w^T Sigma w/(2 sigma^2) - k/(2 sigma^2) at y = sigma w"""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    w = np.asarray(w, dtype=np.float64)
    linear = moments.p * float(np.sum(w)) / sigma
    quadratic = float(moments.quadratic_form(w)) / (2.0 * sigma**2)
    return linear + quadratic - shape.k / (2.0 * sigma**2)


def gaussian_mechanism_delta(sensitivity: float, sigma: float, epsilon: float) -> float:
    """
    Exact delta(epsilon) between N(sensitivity, sigma^2) and N(0, sigma^2)

    Phi(D/(2 sigma) - eps sigma/D) - e^eps Phi(-D/(2 sigma) - eps sigma/D),
    evaluated from log Phi so neither term underflows before the difference.
    """
    if sensitivity <= 0 or sigma <= 0:
        raise ValueError("sensitivity and sigma must be positive")
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    if math.isinf(epsilon):
        return 0.0
    ratio = sensitivity / sigma
    shift = epsilon / ratio
    log_first = float(special.log_ndtr(ratio / 2.0 - shift))
    log_second = epsilon + float(special.log_ndtr(-ratio / 2.0 - shift))
    if log_second >= log_first or math.isinf(log_first):
        return 0.0
    return min(1.0, max(0.0, -math.exp(log_first) * math.expm1(log_second - log_first)))


def gaussian_mechanism_sigma(sensitivity: float, epsilon: float, delta: float) -> float:
    """Noise multiplier at which the Gaussian mechanism reaches exactly (epsilon, delta)"""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    low = high = sensitivity
    while gaussian_mechanism_delta(sensitivity, low, epsilon) <= delta:
        low /= 2.0
    while gaussian_mechanism_delta(sensitivity, high, epsilon) > delta:
        high *= 2.0
    return optimize.brentq(
        lambda sigma: gaussian_mechanism_delta(sensitivity, sigma, epsilon) - delta,
        low,
        high,
        xtol=1e-14,
        rtol=1e-12,
    )

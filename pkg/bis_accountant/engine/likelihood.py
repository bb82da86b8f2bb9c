"""
Likelihood engine for Balanced Iteration Subsampling
Exact O(Tk) log-likelihood ratio and the O(T) screening upper bound, both in log-space
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from bis_accountant.core.errors import NumericalContractError
from bis_accountant.models.schemas import MechanismShape

logger = logging.getLogger(__name__)


class RatioKind(str, Enum):
    EXACT = "Exact"
    UPPER_BOUND = "UpperBound"


@dataclass(frozen=True)
class LogLikelihoodRatio:
    """log(P(y)/Q(y)) in nats, or an upper bound on it"""
    value: float
    kind: RatioKind


def log_weights(y: np.ndarray, sigma: float) -> np.ndarray:
    """log w_i = (2 y_i - 1) / (2 sigma^2), elementwise; works on one output or a batch"""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return (2.0 * np.asarray(y, dtype=np.float64) - 1.0) / (2.0 * sigma * sigma)


def log_binomial(T: int, k: int) -> float:
    """log C(T, k) via log-gamma differences"""
    return float(special.gammaln(T + 1) - special.gammaln(k + 1) - special.gammaln(T - k + 1))


def _check_finite(log_w: np.ndarray) -> None:
    if not np.all(np.isfinite(log_w)):
        raise NumericalContractError("log weights must be finite")


def _as_rows(log_w: np.ndarray) -> np.ndarray:
    rows = np.asarray(log_w, dtype=np.float64)
    return rows[None, :] if rows.ndim == 1 else rows


def exact_log_ratios(log_w: np.ndarray, k: int) -> np.ndarray:
    """
    Exact log-likelihood ratio for each row of log weights

    Runs the suffix recursion F(t, r) = F(t+1, r) + w_t F(t+1, r-1) from
    t = T down to 1 over a rolling (k+1)-wide state holding log F, so each
    row costs O(Tk) time and O(k) space. log F(T+1, r>0) starts at -inf,
    which logaddexp treats as absorbing.

    Args:
        log_w: (T,) or (n, T) array of log weights
        k: participation count, 1 <= k <= T

    Returns:
        (n,) array of log(F(1, k)) - log C(T, k)
    """
    rows = _as_rows(log_w)
    _check_finite(rows)
    n, T = rows.shape
    if not 1 <= k <= T:
        raise ValueError(f"k={k} must lie in [1, T={T}]")

    state = np.full((n, k + 1), -np.inf)
    state[:, 0] = 0.0
    for t in range(T - 1, -1, -1):
        # the right-hand side reads the previous suffix before the write,
        # which is the high-to-low update of a single rolling array
        state[:, 1:] = np.logaddexp(state[:, 1:], rows[:, t, None] + state[:, :-1])
    return state[:, k] - log_binomial(T, k)


def screening_log_ratios(log_w: np.ndarray, k: int) -> np.ndarray:
    """k * log(mean of weights) for each row; never below the exact ratio"""
    rows = _as_rows(log_w)
    _check_finite(rows)
    T = rows.shape[1]
    return k * (special.logsumexp(rows, axis=1) - np.log(T))


def exact_log_ratio(log_w: np.ndarray, shape: MechanismShape) -> LogLikelihoodRatio:
    """Exact log(P(y)/Q(y)) for one realization"""
    if np.shape(log_w) != (shape.T,):
        raise ValueError(f"expected {shape.T} log weights, got shape {np.shape(log_w)}")
    value = float(exact_log_ratios(log_w, shape.k)[0])
    return LogLikelihoodRatio(value=value, kind=RatioKind.EXACT)


def screening_log_ratio(log_w: np.ndarray, shape: MechanismShape) -> LogLikelihoodRatio:
    """O(T) upper bound k * log((1/T) sum w_i) for one realization"""
    if np.shape(log_w) != (shape.T,):
        raise ValueError(f"expected {shape.T} log weights, got shape {np.shape(log_w)}")
    value = float(screening_log_ratios(log_w, shape.k)[0])
    return LogLikelihoodRatio(value=value, kind=RatioKind.UPPER_BOUND)

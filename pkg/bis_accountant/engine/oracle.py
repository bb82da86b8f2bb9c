"""
Brute-force reference implementations
Used by the test suite and the validate command; shares no code with the likelihood engine
"""
import itertools
import logging
import math
from typing import Iterator, Tuple, Union

import numpy as np
from scipy import integrate, stats

from bis_accountant.core.config import settings
from bis_accountant.core.errors import EnumerationCapError
from bis_accountant.models.schemas import MechanismShape

logger = logging.getLogger(__name__)

ShapeLike = Union[MechanismShape, Tuple[int, int]]


def _unpack(shape: ShapeLike) -> Tuple[int, int]:
    if isinstance(shape, MechanismShape):
        return shape.T, shape.k
    T, k = shape
    return int(T), int(k)


def _subset_slices(T: int, k: int, slice_size: int) -> Iterator[np.ndarray]:
    """k-subsets of range(T) in lexicographic order, slice_size at a time"""
    combos = itertools.combinations(range(T), k)
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, slice_size)), dtype=np.int64
        )
        if block.size == 0:
            return
        yield block.reshape(-1, k)


def enumerate_log_ratio(log_w: np.ndarray, shape: ShapeLike) -> Union[float, np.ndarray]:
    """
    log((1/C(T,k)) * sum over k-subsets of prod w_i) by listing every subset

    Subsets stream from itertools.combinations in lexicographic order, a
    slice at a time, into a running max-shifted log-sum-exp per row. Memory
    is bounded by settings.block_elements whatever C(T, k) is. Accepts one
    weight vector or a batch of rows.

    Raises:
        EnumerationCapError: if C(T, k) exceeds settings.enumeration_cap
    """
    T, k = _unpack(shape)
    rows = np.asarray(log_w, dtype=np.float64)
    single = rows.ndim == 1
    if single:
        rows = rows[None, :]
    if rows.shape[1] != T:
        raise ValueError(f"expected {T} log weights, got {rows.shape[1]}")
    if not 0 <= k <= T:
        raise ValueError(f"k={k} must lie in [0, T={T}]")

    count = math.comb(T, k)
    if count > settings.enumeration_cap:
        raise EnumerationCapError(f"C({T}, {k}) = {count} exceeds the enumeration cap {settings.enumeration_cap}")
    if k == 0:
        result = np.zeros(rows.shape[0])
        return float(result[0]) if single else result

    slice_size = max(1, settings.block_elements // (rows.shape[0] * k))
    top = np.full(rows.shape[0], -np.inf)
    total = np.zeros(rows.shape[0])
    for subsets in _subset_slices(T, k, slice_size):
        products = rows[:, subsets].sum(axis=-1)
        new_top = np.maximum(top, products.max(axis=1))
        total = total * np.exp(top - new_top) + np.exp(products - new_top[:, None]).sum(axis=1)
        top = new_top
    result = top + np.log(total) - (math.lgamma(T + 1) - math.lgamma(k + 1) - math.lgamma(T - k + 1))
    return float(result[0]) if single else result


def quadrature_delta_1d(sigma: float, epsilon: float) -> float:
    """
    delta(epsilon) for T = k = 1 by integrating N(1, s^2) - e^eps N(0, s^2) over its positive region

    The integrand is positive exactly for y > sigma^2 * epsilon + 1/2.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    start = sigma * sigma * epsilon + 0.5
    stop = max(start, 1.0) + 40.0 * sigma
    factor = math.exp(epsilon)

    def integrand(y: float) -> float:
        return stats.norm.pdf(y, loc=1.0, scale=sigma) - factor * stats.norm.pdf(y, loc=0.0, scale=sigma)

    value, error = integrate.quad(integrand, start, stop, epsabs=1e-12, epsrel=1e-10, limit=500)
    if error > 1e-10:
        logger.warning(f"quadrature error estimate {error:.3g} at sigma={sigma}, epsilon={epsilon}")
    return max(0.0, value)

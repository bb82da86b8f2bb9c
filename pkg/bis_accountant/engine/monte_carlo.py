"""
Monte Carlo accountant for Balanced Iteration Subsampling
Screen-then-exact estimation of the hockey-stick divergence with a certified upper bound
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from bis_accountant.core.config import resolve_worker_count, settings
from bis_accountant.engine.likelihood import exact_log_ratios, log_weights, screening_log_ratios
from bis_accountant.engine.sampling import Realization, Source, sample_outputs, stream_generator
from bis_accountant.models.schemas import AccountingConfig, CrossCheckEstimate, DeltaEstimate, MechanismShape

logger = logging.getLogger(__name__)

# Q-side streams live above every stream id a P-side run can use
Q_STREAM_OFFSET = 2**40


@dataclass
class SampleCounters:
    """Tally of how samples were disposed of"""
    screened_out: int = 0
    exact_evals: int = 0


@dataclass(frozen=True)
class ChunkResult:
    """Partial sums of one RNG stream"""
    stream_id: int
    count: int
    screened_out: int
    exact_evals: int
    sum_of_values: float
    sum_of_squares: float


def hinge_values(
    log_w: np.ndarray,
    k: int,
    epsilon: float,
    screening: bool = True,
) -> Tuple[np.ndarray, int]:
    """
    max{1 - exp(epsilon - L), 0} for each row of log weights

    Rows whose screening bound is <= epsilon contribute exactly 0 and skip
    the dynamic program when screening is on. The exact value is clipped to
    the screening bound, so turning the filter off reproduces the same
    array bit for bit.

    Returns:
        (values, number of rows evaluated exactly)
    """
    bound = screening_log_ratios(log_w, k)
    values = np.zeros(bound.shape[0])
    candidates = bound > epsilon if screening else np.ones(bound.shape[0], dtype=bool)
    exact_evals = int(np.count_nonzero(candidates))
    if exact_evals:
        exact = np.minimum(exact_log_ratios(log_w[candidates], k), bound[candidates])
        gap = epsilon - exact
        # -expm1 keeps 1 - exp(gap) accurate when gap is near 0
        values[candidates] = np.where(gap < 0, -np.expm1(np.minimum(gap, 0.0)), 0.0)
    return values, exact_evals


def per_sample_value(
    realization: Realization,
    config: AccountingConfig,
    counters: Optional[SampleCounters] = None,
) -> float:
    """Hinge value of one realization drawn from P"""
    if realization.source != Source.FROM_P:
        raise ValueError("per_sample_value expects a realization drawn from P")
    log_w = log_weights(realization.y, config.sigma)[None, :]
    values, exact_evals = hinge_values(log_w, config.shape.k, config.epsilon)
    if counters is not None:
        counters.exact_evals += exact_evals
        counters.screened_out += 1 - exact_evals
    return float(values[0])


def bernstein_upper_bound(point: float, variance: float, samples: int, eta: float) -> float:
    """
    One-sided empirical-Bernstein upper confidence bound for a mean in [0, 1]

    point + sqrt(2 V ln(1/eta) / s) + 7 ln(1/eta) / (3 (s - 1))
    """
    if samples < 2:
        return 1.0
    log_term = math.log(1.0 / eta)
    spread = math.sqrt(max(0.0, 2.0 * variance * log_term / samples))
    constant = 7.0 * log_term / (3.0 * (samples - 1))
    return min(1.0, point + spread + constant)


def plan_chunks(samples: int, chunk_size: Optional[int] = None) -> List[Tuple[int, int]]:
    """(stream_id, sample count) pairs covering `samples` draws"""
    size = chunk_size or settings.chunk_size
    plan = []
    for stream_id, start in enumerate(range(0, samples, size)):
        plan.append((stream_id, min(size, samples - start)))
    return plan


def block_rows(T: int, block_elements: Optional[int] = None) -> int:
    """Rows per vectorised block so that a block holds at most block_elements floats"""
    return max(1, (block_elements or settings.block_elements) // T)


def _evaluate_chunk(
    T: int,
    k: int,
    sigma: float,
    epsilon: float,
    seed: int,
    stream_id: int,
    count: int,
    rows_per_block: int,
    screening: bool,
) -> ChunkResult:
    """Draw `count` outputs from P on one stream and reduce their hinge values"""
    shape = MechanismShape(T=T, k=k)
    rng = stream_generator(seed, stream_id)
    total = 0.0
    total_sq = 0.0
    exact_evals = 0
    remaining = count
    while remaining > 0:
        n = min(rows_per_block, remaining)
        y = sample_outputs(shape, sigma, Source.FROM_P, rng, n)
        values, evaluated = hinge_values(log_weights(y, sigma), k, epsilon, screening)
        total += float(np.sum(values))
        total_sq += float(np.sum(values * values))
        exact_evals += evaluated
        remaining -= n
    logger.debug(f"stream {stream_id}: {count} samples, {exact_evals} exact evaluations")
    return ChunkResult(
        stream_id=stream_id,
        count=count,
        screened_out=count - exact_evals,
        exact_evals=exact_evals,
        sum_of_values=total,
        sum_of_squares=total_sq,
    )


def _run_chunks(tasks: list, workers: Optional[int], progress: Optional[bool], desc: str) -> Iterator:
    n_jobs = resolve_worker_count(workers)
    show = settings.show_progress if progress is None else progress
    results = Parallel(n_jobs=n_jobs, return_as="generator")(tasks)
    return iter(tqdm(results, total=len(tasks), disable=not show, desc=desc, leave=False))


def estimate_delta(
    config: AccountingConfig,
    workers: Optional[int] = None,
    screening: bool = True,
    progress: Optional[bool] = None,
) -> DeltaEstimate:
    """
    Estimate delta(epsilon) for BIS from `config.samples` draws under P

    Chunks are reduced in stream order regardless of which worker finished
    first, so the estimate depends on the seed and the sampling settings only.
    """
    shape = config.shape
    plan = plan_chunks(config.samples)
    rows = block_rows(shape.T)
    logger.info(
        f"Estimating delta for T={shape.T}, k={shape.k}, sigma={config.sigma}, "
        f"epsilon={config.epsilon} with {config.samples} samples in {len(plan)} streams"
    )
    tasks = [
        delayed(_evaluate_chunk)(
            shape.T, shape.k, config.sigma, config.epsilon, config.seed,
            stream_id, count, rows, screening,
        )
        for stream_id, count in plan
    ]

    samples_used = screened_out = exact_evals = 0
    sum_of_values = sum_of_squares = 0.0
    for chunk in _run_chunks(tasks, workers, progress, "chunks"):
        samples_used += chunk.count
        screened_out += chunk.screened_out
        exact_evals += chunk.exact_evals
        sum_of_values += chunk.sum_of_values
        sum_of_squares += chunk.sum_of_squares

    point = sum_of_values / samples_used
    variance = 0.0
    if samples_used > 1:
        variance = max(0.0, (sum_of_squares - samples_used * point * point) / (samples_used - 1))
    upper_bound = max(point, bernstein_upper_bound(point, variance, samples_used, config.eta))
    logger.info(
        f"delta_hat={point:.6g}, ucb={upper_bound:.6g}, exact evaluations {exact_evals}/{samples_used}"
    )
    return DeltaEstimate(
        point=point,
        upper_bound=upper_bound,
        samples_used=samples_used,
        screened_out=screened_out,
        exact_evals=exact_evals,
        sum_of_values=sum_of_values,
        sum_of_squares=sum_of_squares,
    )


def verify(config: AccountingConfig, workers: Optional[int] = None, progress: Optional[bool] = None) -> bool:
    """True iff the certified upper bound fits inside (1 - delta_split) * delta_target"""
    estimate = estimate_delta(config, workers=workers, progress=progress)
    passed = estimate.upper_bound <= config.delta_prime
    logger.info(f"verify sigma={config.sigma}: ucb={estimate.upper_bound:.6g} vs {config.delta_prime:.6g} -> {passed}")
    return passed


def _evaluate_q_chunk(
    T: int,
    k: int,
    sigma: float,
    epsilon: float,
    seed: int,
    stream_id: int,
    count: int,
    rows_per_block: int,
) -> ChunkResult:
    """Draw `count` outputs from Q and reduce max{P/Q - e^epsilon, 0}"""
    shape = MechanismShape(T=T, k=k)
    rng = stream_generator(seed, stream_id)
    total = 0.0
    total_sq = 0.0
    exact_evals = 0
    remaining = count
    while remaining > 0:
        n = min(rows_per_block, remaining)
        log_w = log_weights(sample_outputs(shape, sigma, Source.FROM_Q, rng, n), sigma)
        bound = screening_log_ratios(log_w, k)
        candidates = bound > epsilon
        values = np.zeros(n)
        if np.any(candidates):
            exact = np.minimum(exact_log_ratios(log_w[candidates], k), bound[candidates])
            with np.errstate(over="ignore"):
                values[candidates] = math.exp(epsilon) * np.maximum(np.expm1(exact - epsilon), 0.0)
        total += float(np.sum(values))
        total_sq += float(np.sum(values * values))
        exact_evals += int(np.count_nonzero(candidates))
        remaining -= n
    return ChunkResult(
        stream_id=stream_id,
        count=count,
        screened_out=count - exact_evals,
        exact_evals=exact_evals,
        sum_of_values=total,
        sum_of_squares=total_sq,
    )


def estimate_delta_q_side(
    config: AccountingConfig,
    workers: Optional[int] = None,
    progress: Optional[bool] = None,
) -> CrossCheckEstimate:
    """
    Cross-check estimator over outputs drawn from Q

    Targets the same divergence as estimate_delta but with unbounded
    per-sample values, so it reports a standard error instead of a
    certified bound. Validation only.
    """
    shape = config.shape
    plan = plan_chunks(config.samples)
    rows = block_rows(shape.T)
    tasks = [
        delayed(_evaluate_q_chunk)(
            shape.T, shape.k, config.sigma, config.epsilon, config.seed,
            Q_STREAM_OFFSET + stream_id, count, rows,
        )
        for stream_id, count in plan
    ]
    samples_used = screened_out = 0
    sum_of_values = sum_of_squares = 0.0
    for chunk in _run_chunks(tasks, workers, progress, "q-chunks"):
        samples_used += chunk.count
        screened_out += chunk.screened_out
        sum_of_values += chunk.sum_of_values
        sum_of_squares += chunk.sum_of_squares

    point = sum_of_values / samples_used
    variance = max(0.0, (sum_of_squares - samples_used * point * point) / (samples_used - 1))
    return CrossCheckEstimate(
        point=point,
        standard_error=math.sqrt(variance / samples_used),
        samples_used=samples_used,
        screened_out=screened_out,
    )

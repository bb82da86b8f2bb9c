"""
Noise multiplier search
Brackets sigma with cheap optimistic estimates, then walks a 3-significant-digit grid downward
"""
import logging
import math
from decimal import ROUND_CEILING, Decimal
from typing import Dict, List, Optional, Tuple

from bis_accountant.core.config import default_coarse_sample_count, settings
from bis_accountant.core.errors import BracketError
from bis_accountant.engine.asymptotics import full_batch_sensitivity, gaussian_mechanism_sigma
from bis_accountant.engine.monte_carlo import estimate_delta
from bis_accountant.engine.sampling import derive_seed
from bis_accountant.models.schemas import (
    AccountingConfig,
    DeltaEstimate,
    MechanismShape,
    NoiseSearchResult,
    SearchMode,
    SearchPhase,
    TraceEntry,
)

logger = logging.getLogger(__name__)

# spawn-key tags separating the sub-seeds of the two phases
BRACKET_KEY = 1
GRID_KEY = 2


def grid_ceil(sigma: float) -> Decimal:
    """Smallest 3-significant-digit value >= sigma"""
    value = Decimal(repr(float(sigma)))
    point = value.quantize(Decimal(1).scaleb(value.adjusted() - 2), rounding=ROUND_CEILING)
    if point.adjusted() != value.adjusted():
        # rounding carried into the next decade, e.g. 9.996 -> 10.00
        point = point.quantize(Decimal(1).scaleb(point.adjusted() - 2), rounding=ROUND_CEILING)
    return point


def grid_step(point: Decimal) -> Decimal:
    """One unit of the third significant digit of `point`"""
    return Decimal(1).scaleb(point.adjusted() - 2)


def grid_below(point: Decimal) -> Decimal:
    """Next grid value under `point`; the step shrinks when crossing a decade"""
    lower = point - grid_step(point)
    if lower.adjusted() < point.adjusted():
        # 10.0 -> 9.99, not 9.90
        lower = point - grid_step(lower)
    return lower.quantize(grid_step(lower))


def grid_key(point: Decimal) -> Tuple[int, int]:
    """(mantissa, exponent + 1000) identifying a grid point; both parts are non-negative seed keys"""
    exponent = point.adjusted() - 2
    return int(point.scaleb(-exponent)), exponent + 1000


def _config(shape, sigma, epsilon, delta_target, samples, seed, delta_split) -> AccountingConfig:
    return AccountingConfig(
        shape=shape,
        sigma=sigma,
        epsilon=epsilon,
        delta_target=delta_target,
        samples=samples,
        seed=seed,
        delta_split=delta_split,
    )


def _bracket(
    shape: MechanismShape,
    epsilon: float,
    delta_target: float,
    coarse_samples: int,
    seed: int,
    workers: Optional[int],
    progress: Optional[bool] = None,
) -> Tuple[float, float, List[TraceEntry]]:
    trace: List[TraceEntry] = []

    def passes(sigma: float) -> bool:
        sub_seed = derive_seed(seed, BRACKET_KEY, len(trace))
        estimate = estimate_delta(
            _config(shape, sigma, epsilon, delta_target, coarse_samples, sub_seed, settings.default_delta_split),
            workers=workers,
            progress=progress,
        )
        passed = estimate.point < delta_target
        trace.append(TraceEntry(sigma=sigma, phase=SearchPhase.BRACKET, passed=passed, estimate=estimate))
        logger.info(f"bracket sigma={sigma:.6g}: delta_hat={estimate.point:.4g} -> {'pass' if passed else 'fail'}")
        return passed

    # the full-batch Gaussian needs no more noise than BIS, so it anchors from below
    anchor = gaussian_mechanism_sigma(full_batch_sensitivity(shape), epsilon, delta_target)
    low = high = anchor
    if passes(anchor):
        low = anchor / 2.0
        while passes(low):
            high = low
            if low / 2.0 < settings.sigma_floor:
                logger.warning(f"every sigma down to {low:.3g} passes; flooring the bracket")
                return settings.sigma_floor, high, trace
            low /= 2.0
    else:
        high = anchor * 2.0
        while not passes(high):
            low = high
            high *= 2.0
            if high > settings.sigma_ceiling:
                raise BracketError(
                    f"no passing sigma below the ceiling {settings.sigma_ceiling} for "
                    f"T={shape.T}, k={shape.k}, epsilon={epsilon}, delta={delta_target}"
                )

    for _ in range(settings.bracket_max_bisections):
        if high / low - 1.0 <= settings.bracket_rtol:
            break
        middle = math.sqrt(low * high)
        if passes(middle):
            high = middle
        else:
            low = middle
    return low, high, trace


def bracket_sigma(
    shape: MechanismShape,
    epsilon: float,
    delta_target: float,
    coarse_samples: int,
    seed: int = 0,
    workers: Optional[int] = None,
) -> Tuple[float, float]:
    """
    Interval (sigma_low, sigma_high) whose low-sample optimistic estimates
    straddle delta_target

    Starts from the full-batch closed-form sigma, doubles until an estimate
    passes, then bisects geometrically down to settings.bracket_rtol.
    A delta_target of 1 or more is met by any sigma and returns (0, 0).

    Raises:
        BracketError: if no passing sigma exists below settings.sigma_ceiling
    """
    if delta_target >= 1:
        return 0.0, 0.0
    if coarse_samples < settings.min_coarse_samples:
        raise ValueError(f"coarse_samples must be at least {settings.min_coarse_samples}")
    low, high, _ = _bracket(shape, epsilon, delta_target, coarse_samples, seed, workers)
    return low, high


def find_min_sigma(
    shape: MechanismShape,
    epsilon: float,
    delta_target: float,
    mode: SearchMode,
    samples: int,
    delta_split: float = 0.1,
    seed: int = 0,
    coarse_samples: Optional[int] = None,
    workers: Optional[int] = None,
    progress: Optional[bool] = None,
) -> NoiseSearchResult:
    """
    Smallest grid sigma certifying (epsilon, delta_target)

    After bracketing, sigma_high is rounded up to 3 significant digits and
    the search steps down one unit of the third significant digit at a time
    until a candidate fails. Certified candidates must pass verify;
    optimistic ones compare the point estimate with delta_target.

    Each grid point draws from its own sub-seed derived from (seed, grid
    point), so both modes see identical samples at a shared candidate and a
    certified pass always implies an optimistic pass.
    """
    mode = SearchMode(mode)
    if delta_target >= 1:
        logger.warning("delta_target >= 1 is met by every sigma")
        return NoiseSearchResult(
            sigma=settings.sigma_floor,
            status=mode,
            note="degenerate: delta_target >= 1, every sigma passes; reporting the grid floor",
        )

    coarse = coarse_samples or default_coarse_sample_count(delta_target)
    low, high, trace = _bracket(shape, epsilon, delta_target, coarse, seed, workers, progress)
    evaluated: Dict[Decimal, Tuple[bool, DeltaEstimate]] = {}

    def evaluate(point: Decimal, phase: SearchPhase) -> bool:
        if point not in evaluated:
            config = _config(
                shape, float(point), epsilon, delta_target, samples,
                derive_seed(seed, GRID_KEY, *grid_key(point)), delta_split,
            )
            estimate = estimate_delta(config, workers=workers, progress=progress)
            if mode == SearchMode.CERTIFIED:
                passed = estimate.upper_bound <= config.delta_prime
            else:
                passed = estimate.point <= delta_target
            evaluated[point] = (passed, estimate)
            logger.info(
                f"{mode.value} sigma={point}: delta_hat={estimate.point:.4g}, "
                f"ucb={estimate.upper_bound:.4g} -> {'pass' if passed else 'fail'}"
            )
        passed, estimate = evaluated[point]
        trace.append(TraceEntry(sigma=float(point), phase=phase, passed=passed, estimate=estimate))
        return passed

    current = grid_ceil(high)
    passed = evaluate(current, SearchPhase.DESCENT)
    if not passed:
        # a failing start belongs to the climb, not to the descent
        trace[-1] = trace[-1].model_copy(update={"phase": SearchPhase.ASCENT})
    while not passed:
        current = grid_ceil(float(current) * settings.ascent_factor)
        if current > grid_ceil(settings.sigma_ceiling):
            raise BracketError(f"grid search climbed past the ceiling {settings.sigma_ceiling}")
        passed = evaluate(current, SearchPhase.ASCENT)
    if trace[-1].phase == SearchPhase.ASCENT:
        # the passing ascent point opens the descent
        trace[-1] = trace[-1].model_copy(update={"phase": SearchPhase.DESCENT})

    best = current
    floor = Decimal(repr(settings.sigma_floor))
    while True:
        candidate = grid_below(best)
        if candidate < floor or not evaluate(candidate, SearchPhase.DESCENT):
            break
        best = candidate

    total = sum(entry.estimate.samples_used for entry in trace)
    logger.info(f"{mode.value} search for T={shape.T}, k={shape.k}: sigma={best} after {len(trace)} evaluations")
    return NoiseSearchResult(
        sigma=float(best),
        status=mode,
        trace=trace,
        total_samples=total,
        sigma_low=low,
        sigma_high=high,
    )


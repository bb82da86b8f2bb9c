"""
Self-check suite
Compares the likelihood engine, the Monte Carlo accountant and the asymptotic forms against the oracle
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from bis_accountant.engine.asymptotics import (
    bis_moments,
    gaussian_mechanism_delta,
    high_noise_loss,
    low_noise_loss,
)
from bis_accountant.engine.likelihood import exact_log_ratios, log_weights, screening_log_ratios
from bis_accountant.engine.monte_carlo import estimate_delta, estimate_delta_q_side
from bis_accountant.engine.oracle import enumerate_log_ratio, quadrature_delta_1d
from bis_accountant.engine.sampling import ParticipationVector, sample_participation_batch, stream_generator
from bis_accountant.models.schemas import AccountingConfig, MechanismShape

logger = logging.getLogger(__name__)

# absolute slack for rounding in the dominance comparison
DOMINANCE_SLACK = 1e-10
# below this, successive convergence gaps are rounding noise and count as equal
CONVERGENCE_FLOOR = 1e-12

FAULTS = ("screening-inverted",)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _screening(log_w: np.ndarray, k: int, fault: Optional[str]) -> np.ndarray:
    bound = screening_log_ratios(log_w, k)
    if fault == "screening-inverted":
        # mirror of the bound below the exact value
        return 2.0 * exact_log_ratios(log_w, k) - bound
    return bound


def check_enumeration(max_t: int = 16, vectors: int = 100, seed: int = 0) -> CheckResult:
    """exact_log_ratio against brute-force enumeration for every T <= max_t and k <= T"""
    rng = stream_generator(seed, 0)
    worst = 0.0
    pairs = 0
    for T in range(1, max_t + 1):
        log_w = rng.normal(0.0, 2.0, size=(vectors, T))
        for k in range(1, T + 1):
            engine = exact_log_ratios(log_w, k)
            oracle = enumerate_log_ratio(log_w, (T, k))
            error = np.abs(engine - oracle) / np.maximum(1.0, np.abs(oracle))
            worst = max(worst, float(np.max(error)))
            pairs += 1
    return CheckResult(
        "enumeration-equivalence",
        worst <= 1e-9,
        f"{pairs} (T, k) pairs x {vectors} vectors, worst relative error {worst:.3g}",
    )


def check_dominance(instances: int = 100_000, max_t: int = 64, seed: int = 0, fault: Optional[str] = None) -> CheckResult:
    """Screening bound >= exact value on random weight vectors over every (T, k) with T <= max_t"""
    rng = stream_generator(seed, 1)
    pairs = [(T, k) for T in range(1, max_t + 1) for k in range(1, T + 1)]
    per_pair = max(1, math.ceil(instances / len(pairs)))
    worst = -math.inf
    violations = 0
    for T, k in pairs:
        log_w = rng.normal(0.0, 3.0, size=(per_pair, T))
        gap = exact_log_ratios(log_w, k) - _screening(log_w, k, fault)
        violations += int(np.count_nonzero(gap > DOMINANCE_SLACK))
        worst = max(worst, float(np.max(gap)))
    return CheckResult(
        "dominance",
        violations == 0,
        f"{per_pair * len(pairs)} instances, {violations} violations, largest exact - bound {worst:.3g}",
    )


def check_equal_weights(max_t: int = 64, seed: int = 0) -> CheckResult:
    """Bound and exact value coincide at k*c for a constant weight vector"""
    rng = stream_generator(seed, 2)
    worst = 0.0
    for T in range(1, max_t + 1):
        c = float(rng.normal(0.0, 5.0))
        log_w = np.full((1, T), c)
        for k in range(1, T + 1):
            expected = k * c
            exact = float(exact_log_ratios(log_w, k)[0])
            bound = float(screening_log_ratios(log_w, k)[0])
            scale = max(1.0, abs(expected))
            worst = max(worst, abs(exact - expected) / scale, abs(bound - expected) / scale)
    return CheckResult("equal-weights", worst <= 1e-9, f"worst relative error {worst:.3g}")


def check_closed_form(points: int = 20) -> CheckResult:
    """Gaussian-mechanism delta against 1-D quadrature on a sigma x epsilon grid"""
    worst = 0.0
    for sigma in np.geomspace(0.1, 50.0, points):
        for epsilon in np.linspace(0.0, 10.0, points):
            closed = gaussian_mechanism_delta(1.0, float(sigma), float(epsilon))
            numeric = quadrature_delta_1d(float(sigma), float(epsilon))
            worst = max(worst, abs(closed - numeric))
    return CheckResult("closed-form-vs-quadrature", worst <= 1e-8, f"{points}x{points} grid, worst gap {worst:.3g}")


def _monotone(sups: Sequence[float]) -> bool:
    return all(later <= max(earlier, CONVERGENCE_FLOOR) for earlier, later in zip(sups, sups[1:]))


def _convergence(name: str, sigmas: Sequence[float], gap: Callable[[float], float], limit: float) -> CheckResult:
    sups = [gap(sigma) for sigma in sigmas]
    passed = _monotone(sups) and sups[-1] < limit
    detail = ", ".join(f"sigma={sigma:g}: {sup:.3g}" for sigma, sup in zip(sigmas, sups))
    return CheckResult(name, passed, detail)


def low_noise_gaps(sigma: float, shape: MechanismShape, draws: int = 100, seed: int = 0) -> np.ndarray:
    """Relative gaps |low_noise_loss - exact| at y = x + sigma w over random (x, w)"""
    rng = stream_generator(seed, 3)
    subsets = sample_participation_batch(shape, rng, draws)
    noise = rng.standard_normal((draws, shape.T))
    gaps = np.empty(draws)
    for row in range(draws):
        x = ParticipationVector(tuple(int(i) + 1 for i in subsets[row]))
        y = x.indicator(shape.T) + sigma * noise[row]
        exact = float(exact_log_ratios(log_weights(y, sigma)[None, :], shape.k)[0])
        approx = low_noise_loss(x, noise[row], sigma, shape)
        gaps[row] = abs(approx - exact) / max(1.0, abs(exact))
    return gaps


def high_noise_gaps(sigma: float, shape: MechanismShape, draws: int = 100, seed: int = 0) -> np.ndarray:
    """Absolute gaps |high_noise_loss - exact| at y = sigma w over random w"""
    rng = stream_generator(seed, 4)
    moments = bis_moments(shape)
    noise = rng.standard_normal((draws, shape.T))
    exact = exact_log_ratios(log_weights(sigma * noise, sigma), shape.k)
    approx = np.array([high_noise_loss(noise[row], sigma, moments, shape) for row in range(draws)])
    return np.abs(approx - exact)


def check_low_noise(seed: int = 0) -> CheckResult:
    shape = MechanismShape(T=10, k=2)
    return _convergence(
        "low-noise-convergence",
        [1e-1, 1e-2, 1e-3],
        lambda sigma: float(np.max(low_noise_gaps(sigma, shape, seed=seed))),
        1e-4,
    )


def check_high_noise(seed: int = 0) -> CheckResult:
    shape = MechanismShape(T=10, k=2)
    return _convergence(
        "high-noise-convergence",
        [1e1, 1e2, 1e3],
        lambda sigma: float(np.max(high_noise_gaps(sigma, shape, seed=seed))),
        1e-4,
    )


def check_filter_soundness(seed: int = 0, workers: Optional[int] = None) -> CheckResult:
    """Filtered and unfiltered runs over the same streams give the same point estimate"""
    config = AccountingConfig(
        shape=MechanismShape(T=20, k=4), sigma=0.8, epsilon=1.0,
        delta_target=1e-3, samples=20_000, seed=seed,
    )
    filtered = estimate_delta(config, workers=workers)
    unfiltered = estimate_delta(config, workers=workers, screening=False)
    passed = filtered.point == unfiltered.point and unfiltered.exact_evals == unfiltered.samples_used
    return CheckResult(
        "filter-soundness",
        passed,
        f"point {filtered.point!r} vs {unfiltered.point!r}, "
        f"{filtered.exact_evals}/{filtered.samples_used} exact evaluations with the filter",
    )


def check_cross_estimators(seed: int = 0, workers: Optional[int] = None, samples: int = 200_000) -> CheckResult:
    """P-side and Q-side estimates agree within four combined standard errors"""
    config = AccountingConfig(
        shape=MechanismShape(T=1, k=1), sigma=1.0, epsilon=1.0,
        delta_target=0.5, samples=samples, seed=seed,
    )
    p_side = estimate_delta(config, workers=workers)
    q_side = estimate_delta_q_side(config, workers=workers)
    n = p_side.samples_used
    p_variance = max(0.0, (p_side.sum_of_squares - n * p_side.point**2) / (n - 1))
    combined = math.sqrt(p_variance / n + q_side.standard_error**2)
    gap = abs(p_side.point - q_side.point)
    return CheckResult(
        "p-q-agreement",
        gap <= 4.0 * combined,
        f"P {p_side.point:.5f} vs Q {q_side.point:.5f}, gap {gap:.3g} vs 4 SE {4.0 * combined:.3g}",
    )


def run_checks(
    max_t: int = 16,
    vectors: int = 100,
    instances: int = 100_000,
    seed: int = 0,
    fault: Optional[str] = None,
    cross_check: bool = False,
    workers: Optional[int] = None,
) -> List[CheckResult]:
    """Run the suite in a fixed order"""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    checks: List[Callable[[], CheckResult]] = [
        lambda: check_enumeration(max_t, vectors, seed),
        lambda: check_dominance(instances, seed=seed, fault=fault),
        lambda: check_equal_weights(seed=seed),
        check_closed_form,
        lambda: check_low_noise(seed),
        lambda: check_high_noise(seed),
        lambda: check_filter_soundness(seed, workers),
    ]
    if cross_check:
        checks.append(lambda: check_cross_estimators(seed, workers))
    results = []
    for check in checks:
        result = check()
        log = logger.info if result.passed else logger.error
        log(result.line())
        results.append(result)
    return results

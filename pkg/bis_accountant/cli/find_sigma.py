"""
find-sigma command
Minimum noise multiplier for a target (epsilon, delta), certified or optimistic
"""
import logging
import time
from typing import Any, Dict, Optional

import click

from bis_accountant.cli.common import (
    as_float,
    as_int,
    coalesce,
    guarded,
    load_batch,
    merge_row,
    output_options,
)
from bis_accountant.cli.output import RecordWriter, build_record
from bis_accountant.core.config import (
    default_coarse_sample_count,
    default_sample_count,
    resolve_worker_count,
    settings,
)
from bis_accountant.engine.noise_search import find_min_sigma
from bis_accountant.models.schemas import MechanismShape, RunRecord, SearchMode

logger = logging.getLogger(__name__)

REQUIRED = ["t", "k", "epsilon"]


def run_search(
    values: Dict[str, Any],
    threads: Optional[int],
    progress: Optional[bool],
    include_runtime: bool,
) -> RunRecord:
    """Search one configuration and wrap the result in a record"""
    delta = as_float(coalesce(values.get("delta"), settings.default_delta), "delta")
    if delta <= 0:
        raise click.UsageError(f"delta must be positive, got {delta}")
    mode_text = str(coalesce(values.get("mode"), SearchMode.CERTIFIED.value)).strip().lower()
    try:
        mode = SearchMode(mode_text)
    except ValueError:
        raise click.UsageError(f"mode must be certified or optimistic, got {mode_text!r}")

    max_samples = as_int(coalesce(values.get("max_samples"), settings.max_samples), "max_samples")
    samples = as_int(coalesce(values.get("samples"), default_sample_count(min(delta, 0.5), max_samples)), "samples")
    coarse = as_int(
        coalesce(values.get("coarse_samples"), default_coarse_sample_count(min(delta, 0.5), max_samples)),
        "coarse_samples",
    )
    if coarse < settings.min_coarse_samples:
        raise click.UsageError(f"coarse samples must be at least {settings.min_coarse_samples}, got {coarse}")
    if samples < settings.min_samples:
        raise click.UsageError(f"samples must be at least {settings.min_samples}, got {samples}")

    shape = MechanismShape(T=as_int(values["t"], "t"), k=as_int(values["k"], "k"))
    epsilon = as_float(values["epsilon"], "epsilon")
    if epsilon <= 0:
        raise click.UsageError(f"epsilon must be positive, got {epsilon}")
    seed = as_int(coalesce(values.get("seed"), 0), "seed")
    if not 0 <= seed < 2**64:
        raise click.UsageError(f"seed must fit in 64 unsigned bits, got {seed}")
    delta_split = as_float(coalesce(values.get("delta_split"), settings.default_delta_split), "delta_split")
    if not 0 < delta_split < 1:
        raise click.UsageError(f"delta split must lie in (0, 1), got {delta_split}")

    workers = resolve_worker_count(threads)
    started = time.perf_counter()
    result = find_min_sigma(
        shape,
        epsilon,
        delta,
        mode,
        samples,
        delta_split=delta_split,
        seed=seed,
        coarse_samples=coarse,
        workers=workers,
        progress=progress,
    )
    elapsed = time.perf_counter() - started
    echo = {
        "T": shape.T,
        "k": shape.k,
        "epsilon": epsilon,
        "delta_target": delta,
        "mode": mode.value,
        "samples": samples,
        "coarse_samples": coarse,
        "seed": seed,
        "delta_split": delta_split,
        "max_samples": max_samples,
    }
    return build_record("find-sigma", echo, result, elapsed, workers, include_runtime)


@click.command("find-sigma")
@click.option("--t", "t", type=int, default=None, help="Total iterations T.")
@click.option("--k", "k", type=int, default=None, help="Participations per example.")
@click.option("--epsilon", type=float, default=None, help="Privacy budget in nats.")
@click.option("--delta", type=float, default=None, help=f"Target delta [default: {settings.default_delta}].")
@click.option("--mode", type=click.Choice([m.value for m in SearchMode]), default=None,
              help="certified (UCB) or optimistic (point estimate) [default: certified].")
@click.option("--samples", type=int, default=None, help="Samples per grid candidate.")
@click.option("--coarse-samples", type=int, default=None, help="Samples per bracketing estimate.")
@click.option("--max-samples", type=int, default=None, help="Cap for the sample-count heuristics.")
@click.option("--seed", type=int, default=None, help="Seed of the search [default: 0].")
@click.option("--delta-split", type=float, default=None, help="Share of delta reserved for the verifier.")
@output_options
@click.pass_context
def find_sigma_command(
    ctx, t, k, epsilon, delta, mode, samples, coarse_samples, max_samples, seed, delta_split,
    batch, threads, progress, fmt, output, no_runtime,
):
    """Find the smallest 3-significant-digit sigma meeting (epsilon, delta)."""
    flags = {
        "t": t, "k": k, "epsilon": epsilon, "delta": delta, "mode": mode, "samples": samples,
        "coarse_samples": coarse_samples, "max_samples": max_samples, "seed": seed,
        "delta_split": delta_split,
    }
    rows = load_batch(batch) if batch else [{}]
    configs = [merge_row(row, flags, REQUIRED) for row in rows]
    writer = RecordWriter(fmt, output)
    try:
        with guarded(ctx):
            for values in configs:
                writer.emit(run_search(values, threads, progress, include_runtime=not no_runtime))
    finally:
        writer.close()

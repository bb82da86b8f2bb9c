"""
estimate-delta command
One Monte Carlo estimate of delta(epsilon) per configuration
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
from bis_accountant.core.config import default_sample_count, resolve_worker_count, settings
from bis_accountant.engine.monte_carlo import estimate_delta
from bis_accountant.models.schemas import AccountingConfig, MechanismShape, RunRecord

logger = logging.getLogger(__name__)

REQUIRED = ["t", "k", "sigma", "epsilon"]


def run_estimate(
    values: Dict[str, Any],
    threads: Optional[int],
    progress: Optional[bool],
    include_runtime: bool,
) -> RunRecord:
    """Build the config from merged flag/batch values, run it and wrap the result"""
    delta = as_float(coalesce(values.get("delta"), settings.default_delta), "delta")
    max_samples = as_int(coalesce(values.get("max_samples"), settings.max_samples), "max_samples")
    samples = values.get("samples")
    if samples is None:
        samples = default_sample_count(delta, max_samples) if 0 < delta < 1 else settings.min_samples
    config = AccountingConfig(
        shape=MechanismShape(T=as_int(values["t"], "t"), k=as_int(values["k"], "k")),
        sigma=as_float(values["sigma"], "sigma"),
        epsilon=as_float(values["epsilon"], "epsilon"),
        delta_target=delta,
        samples=as_int(samples, "samples"),
        seed=as_int(coalesce(values.get("seed"), 0), "seed"),
        delta_split=as_float(coalesce(values.get("delta_split"), settings.default_delta_split), "delta_split"),
    )
    workers = resolve_worker_count(threads)
    started = time.perf_counter()
    result = estimate_delta(config, workers=workers, progress=progress)
    elapsed = time.perf_counter() - started
    echo = {
        "T": config.shape.T,
        "k": config.shape.k,
        "sigma": config.sigma,
        "epsilon": config.epsilon,
        "delta_target": config.delta_target,
        "samples": config.samples,
        "seed": config.seed,
        "delta_split": config.delta_split,
        "max_samples": max_samples,
    }
    return build_record("estimate-delta", echo, result, elapsed, workers, include_runtime)


@click.command("estimate-delta")
@click.option("--t", "t", type=int, default=None, help="Total iterations T.")
@click.option("--k", "k", type=int, default=None, help="Participations per example.")
@click.option("--sigma", type=float, default=None, help="Noise multiplier.")
@click.option("--epsilon", type=float, default=None, help="Privacy budget in nats.")
@click.option("--delta", type=float, default=None, help=f"Target delta [default: {settings.default_delta}].")
@click.option("--samples", type=int, default=None, help="Monte Carlo samples [default: heuristic from delta].")
@click.option("--max-samples", type=int, default=None, help="Cap for the sample-count heuristic.")
@click.option("--seed", type=int, default=None, help="Seed of the sample streams [default: 0].")
@click.option("--delta-split", type=float, default=None, help="Share of delta reserved for the verifier.")
@output_options
@click.pass_context
def estimate_delta_command(
    ctx, t, k, sigma, epsilon, delta, samples, max_samples, seed, delta_split,
    batch, threads, progress, fmt, output, no_runtime,
):
    """Estimate delta(epsilon) of BIS with a certified upper bound."""
    flags = {
        "t": t, "k": k, "sigma": sigma, "epsilon": epsilon, "delta": delta, "samples": samples,
        "max_samples": max_samples, "seed": seed, "delta_split": delta_split,
    }
    rows = load_batch(batch) if batch else [{}]
    configs = [merge_row(row, flags, REQUIRED) for row in rows]
    writer = RecordWriter(fmt, output)
    try:
        with guarded(ctx):
            for values in configs:
                writer.emit(run_estimate(values, threads, progress, include_runtime=not no_runtime))
    finally:
        writer.close()

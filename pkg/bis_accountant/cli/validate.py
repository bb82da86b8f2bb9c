"""
validate command
Runs the oracle and property checks and prints one PASS/FAIL line per check
"""
import logging

import click

from bis_accountant.core.config import resolve_worker_count
from bis_accountant.engine.checks import FAULTS, run_checks

logger = logging.getLogger(__name__)


@click.command("validate")
@click.option("--max-t", type=click.IntRange(1, 16), default=16, show_default=True,
              help="Largest T in the enumeration sweep.")
@click.option("--vectors", type=click.IntRange(min=1), default=100, show_default=True,
              help="Random weight vectors per (T, k) in the enumeration sweep.")
@click.option("--instances", type=click.IntRange(min=1), default=100_000, show_default=True,
              help="Random instances in the dominance check.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--cross-check", is_flag=True, help="Also compare the P-side and Q-side estimators.")
@click.option("--inject-fault", type=click.Choice(list(FAULTS)), default=None,
              help="Break a component on purpose to confirm the suite notices.")
@click.option("--threads", type=click.IntRange(min=1), default=None, envvar="BIS_THREADS")
@click.pass_context
def validate_command(ctx, max_t, vectors, instances, seed, cross_check, inject_fault, threads):
    """Check the engine against brute-force and closed-form references."""
    if inject_fault:
        logger.warning(f"Running with injected fault {inject_fault}")
    results = run_checks(
        max_t=max_t,
        vectors=vectors,
        instances=instances,
        seed=seed,
        fault=inject_fault,
        cross_check=cross_check,
        workers=resolve_worker_count(threads),
    )
    for result in results:
        click.echo(result.line())
    failed = [result.name for result in results if not result.passed]
    if failed:
        logger.error(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        ctx.exit(1)
    click.echo(f"All {len(results)} checks passed")

"""
Record and reference utilities
check-records validates NDJSON output; reference prints the published noise multipliers
"""
import logging

import click
from pydantic import ValidationError

from bis_accountant.cli.output import parse_record
from bis_accountant.engine.reference import reference_frame

logger = logging.getLogger(__name__)


@click.command("check-records")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def check_records_command(ctx, path):
    """Validate every line of an NDJSON record file."""
    valid = invalid = 0
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                parse_record(line)
                valid += 1
            except ValidationError as e:
                invalid += 1
                logger.error(f"line {number}: {e.error_count()} schema error(s): {e.errors()[0].get('msg')}")
    click.echo(f"{valid} valid, {invalid} invalid record(s) in {path}")
    if invalid or not valid:
        ctx.exit(1)


@click.command("reference")
@click.option("--as-batch", is_flag=True, help="Print a find-sigma batch CSV instead of the table.")
@click.option("--mode", type=click.Choice(["certified", "optimistic"]), default="optimistic", show_default=True,
              help="Mode column of the batch CSV.")
def reference_command(as_batch, mode):
    """Published minimum noise multipliers per accounting method."""
    frame = reference_frame()
    if as_batch:
        batch = frame[["T", "k", "epsilon", "delta"]].rename(columns={"T": "t"})
        batch["mode"] = mode
        click.echo(batch.to_csv(index=False), nl=False)
        return
    click.echo(frame.to_string(index=False))

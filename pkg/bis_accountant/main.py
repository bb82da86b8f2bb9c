"""
BIS Accountant command line
Monte Carlo privacy accounting for Balanced Iteration Subsampling in DP-SGD
"""
import logging
import sys

import click

from bis_accountant import __version__
from bis_accountant.cli.estimate import estimate_delta_command
from bis_accountant.cli.find_sigma import find_sigma_command
from bis_accountant.cli.records import check_records_command, reference_command
from bis_accountant.cli.validate import validate_command
from bis_accountant.core.config import settings

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def configure_logging(level: str) -> None:
    """Log lines go to stderr; stdout carries records only"""
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    logging.getLogger("bis_accountant").setLevel(getattr(logging, level.upper()))


@click.group("bis-accountant")
@click.version_option(__version__, prog_name="bis-accountant")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Overrides BIS_LOG_LEVEL.")
def cli(log_level):
    """Privacy accounting for DP-SGD with Balanced Iteration Subsampling."""
    configure_logging(log_level or settings.log_level)


cli.add_command(estimate_delta_command)
cli.add_command(find_sigma_command)
cli.add_command(validate_command)
cli.add_command(check_records_command)
cli.add_command(reference_command)


if __name__ == "__main__":
    cli()

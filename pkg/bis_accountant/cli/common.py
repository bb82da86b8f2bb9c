"""
Shared command-line plumbing
Batch-file loading, output options and the mapping from failures to exit codes
"""
import logging
import math
import numbers
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional

import click
import pandas as pd
from pydantic import ValidationError

from bis_accountant.core.errors import AccountingError

logger = logging.getLogger(__name__)


def output_options(func):
    """--threads, --format, --output and --no-runtime, shared by the run commands"""
    func = click.option(
        "--no-runtime",
        is_flag=True,
        help="Omit wall time and worker count so records are byte-identical across runs.",
    )(func)
    func = click.option("--output", "output", type=click.Path(dir_okay=False), default=None,
                        help="Write records to this file instead of stdout.")(func)
    func = click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json",
                        show_default=True)(func)
    func = click.option("--progress/--no-progress", default=None,
                        help="Show a progress bar on stderr.")(func)
    func = click.option("--threads", type=click.IntRange(min=1), default=None, envvar="BIS_THREADS",
                        help="Worker count; changes wall time only.")(func)
    func = click.option("--batch", type=click.Path(exists=True, dir_okay=False), default=None,
                        help="CSV of configurations, one run per row.")(func)
    return func


def load_batch(path: str) -> List[Dict[str, Any]]:
    """Rows of a batch CSV with blank cells dropped; column names are case-insensitive"""
    frame = pd.read_csv(path)
    frame.columns = [str(column).strip().lower().replace("-", "_") for column in frame.columns]
    rows = []
    for raw in frame.to_dict("records"):
        rows.append({key: value for key, value in raw.items() if not _is_blank(value)})
    logger.info(f"Loaded {len(rows)} configurations from {path}")
    return rows


def _is_blank(value: Any) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return isinstance(value, str) and not value.strip()


def merge_row(row: Dict[str, Any], flags: Dict[str, Any], required: List[str]) -> Dict[str, Any]:
    """Batch cells override flags; every required key must end up present"""
    merged = {key: value for key, value in flags.items() if value is not None}
    merged.update(row)
    missing = [name for name in required if merged.get(name) is None]
    if missing:
        flags_text = ", ".join(f"--{name.replace('_', '-')}" for name in missing)
        raise click.UsageError(f"Missing option(s): {flags_text}")
    return merged


def as_int(value: Any, name: str) -> int:
    if isinstance(value, numbers.Integral) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, str) and value.strip().isdigit():
        return int(value.strip())
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise click.UsageError(f"{name} must be an integer, got {value!r}")
    if not number.is_integer():
        raise click.UsageError(f"{name} must be an integer, got {value!r}")
    return int(number)


def as_float(value: Any, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise click.UsageError(f"{name} must be a number, got {value!r}")


@contextmanager
def guarded(ctx: click.Context) -> Iterator[None]:
    """Invalid configurations exit 2; accounting failures exit 1"""
    try:
        yield
    except ValidationError as e:
        raise click.UsageError(_validation_message(e), ctx=ctx)
    except AccountingError as e:
        logger.error(f"{type(e).__name__}: {e}")
        ctx.exit(1)


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ()))
        parts.append(f"{location}: {item.get('msg')}" if location else str(item.get("msg")))
    return "; ".join(parts)


def coalesce(value: Optional[Any], default: Any) -> Any:
    return default if value is None else value

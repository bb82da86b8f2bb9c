"""
Run record construction and emission
NDJSON records through orjson, optional pandas tables mirroring the published results layout
"""
import hashlib
import logging
from typing import Any, Dict, List, Optional

import click
import orjson
import pandas as pd

from bis_accountant import __version__
from bis_accountant.core.config import get_sampling_config, get_search_config, settings
from bis_accountant.engine.reference import find_reference
from bis_accountant.models.schemas import DeltaEstimate, NoiseSearchResult, RunRecord, RuntimeInfo

logger = logging.getLogger(__name__)


def settings_echo() -> Dict[str, Any]:
    """Every default that can change a numeric field of a record"""
    echo = {**get_sampling_config(), **get_search_config()}
    echo.update(
        {
            "max_iterations": settings.max_iterations,
            "samples_factor": settings.samples_factor,
            "coarse_samples_factor": settings.coarse_samples_factor,
            "min_coarse_samples": settings.min_coarse_samples,
            "max_samples": settings.max_samples,
            "default_delta_split": settings.default_delta_split,
        }
    )
    return echo


def canonical_bytes(record: RunRecord) -> bytes:
    """Serialization of the reproducible part of a record"""
    payload = record.model_dump(mode="json", exclude={"runtime", "fingerprint"}, exclude_none=True)
    return orjson.dumps(payload, option=orjson.OPT_SORT_KEYS)


def build_record(
    command: str,
    config: Dict[str, Any],
    result: Any,
    wall_time_seconds: float,
    worker_count: int,
    include_runtime: bool = True,
) -> RunRecord:
    record = RunRecord(
        command=command,
        config=config,
        result=result,
        artifact_version=__version__,
        settings=settings_echo(),
    )
    record.fingerprint = hashlib.sha256(canonical_bytes(record)).hexdigest()
    if include_runtime:
        record.runtime = RuntimeInfo(wall_time_seconds=wall_time_seconds, worker_count=worker_count)
    return record


def dump_record(record: RunRecord) -> bytes:
    """One NDJSON line, without the trailing newline"""
    return orjson.dumps(record.model_dump(mode="json", exclude_none=True), option=orjson.OPT_SORT_KEYS)


def parse_record(line: str) -> RunRecord:
    """The repository's schema check for one output line"""
    return RunRecord.model_validate_json(line)


def _estimate_row(record: RunRecord) -> Dict[str, Any]:
    result: DeltaEstimate = record.result
    config = record.config
    return {
        "epsilon": config["epsilon"],
        "delta": config["delta_target"],
        "T": config["T"],
        "k": config["k"],
        "sigma": config["sigma"],
        "delta_hat": result.point,
        "ucb": result.upper_bound,
        "samples": result.samples_used,
        "screened_out": result.screened_out,
        "exact_evals": result.exact_evals,
    }


def _search_row(record: RunRecord) -> Dict[str, Any]:
    result: NoiseSearchResult = record.result
    config = record.config
    row = {
        "epsilon": config["epsilon"],
        "delta": config["delta_target"],
        "T": config["T"],
        "k": config["k"],
        "Poisson": None,
        "BIS-RDP": None,
        "RA-PLD": None,
        f"BIS-MC ({result.status.value})": result.sigma,
        "vs Poisson": None,
    }
    reference = find_reference(config["epsilon"], config["delta_target"], config["T"], config["k"])
    if reference is not None:
        row.update(
            {
                "Poisson": reference.poisson,
                "BIS-RDP": reference.bis_rdp,
                "RA-PLD": reference.ra_pld,
                "vs Poisson": f"{100 * reference.noise_reduction(result.sigma):+.1f}%",
            }
        )
    return row


def format_table(records: List[RunRecord]) -> str:
    rows = [
        _estimate_row(record) if record.command == "estimate-delta" else _search_row(record)
        for record in records
    ]
    return pd.DataFrame(rows).to_string(index=False, na_rep="-")


class RecordWriter:
    """Streams records in input order as NDJSON, or collects them for one table"""

    def __init__(self, fmt: str, output: Optional[str]):
        self.fmt = fmt
        self.output = output
        self.pending: List[RunRecord] = []
        if output:
            # truncate once; records are appended as they complete
            open(output, "wb").close()

    def _write(self, data: bytes) -> None:
        if self.output:
            with open(self.output, "ab") as handle:
                handle.write(data)
        else:
            click.echo(data.decode("utf-8"), nl=False)

    def emit(self, record: RunRecord) -> None:
        if self.fmt == "table":
            self.pending.append(record)
        else:
            self._write(dump_record(record) + b"\n")

    def close(self) -> None:
        if self.fmt == "table" and self.pending:
            self._write((format_table(self.pending) + "\n").encode("utf-8"))

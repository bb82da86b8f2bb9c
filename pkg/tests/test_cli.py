import orjson
import pytest
from click.testing import CliRunner

from bis_accountant.cli import find_sigma as find_sigma_module
from bis_accountant.cli.output import build_record, canonical_bytes, format_table, parse_record
from bis_accountant.core.config import settings
from bis_accountant.core.errors import BracketError
from bis_accountant.main import cli
from bis_accountant.models.schemas import CERTIFICATION_CONVENTION, NoiseSearchResult, SearchMode


@pytest.fixture
def runner():
    return CliRunner()


def records(result):
    return [parse_record(line) for line in result.stdout.splitlines() if line.strip()]


def test_estimate_delta_for_one_iteration(runner):
    result = runner.invoke(
        cli,
        ["estimate-delta", "--t", "1", "--k", "1", "--sigma", "1", "--epsilon", "1",
         "--samples", "1000000", "--seed", "7", "--threads", "1"],
    )
    assert result.exit_code == 0, result.output
    (record,) = records(result)
    assert record.command == "estimate-delta"
    assert record.result.point == pytest.approx(0.127, abs=0.002)
    assert record.config["samples"] == 1_000_000
    assert record.config["delta_split"] == 0.1
    assert record.certification_convention == CERTIFICATION_CONVENTION
    assert record.settings["chunk_size"] == settings.chunk_size
    assert record.runtime.worker_count == 1


def test_missing_sigma_is_a_usage_error(runner):
    result = runner.invoke(cli, ["estimate-delta", "--t", "1", "--k", "1", "--epsilon", "1"])
    assert result.exit_code == 2
    assert "--sigma" in result.output


def test_too_few_samples_is_a_usage_error(runner):
    result = runner.invoke(
        cli, ["estimate-delta", "--t", "1", "--k", "1", "--sigma", "1", "--epsilon", "1", "--samples", "10"]
    )
    assert result.exit_code == 2


def test_k_above_t_is_a_usage_error(runner):
    result = runner.invoke(
        cli, ["estimate-delta", "--t", "3", "--k", "4", "--sigma", "1", "--epsilon", "1", "--samples", "1000"]
    )
    assert result.exit_code == 2


def test_worker_count_changes_nothing_but_runtime(runner, monkeypatch):
    monkeypatch.setattr(settings, "chunk_size", 4_000)
    args = ["estimate-delta", "--t", "4", "--k", "2", "--sigma", "0.8", "--epsilon", "1",
            "--samples", "15000", "--seed", "3"]
    serial = records(runner.invoke(cli, args + ["--threads", "1"]))[0]
    for threads in ("4", "16"):
        parallel = records(runner.invoke(cli, args + ["--threads", threads]))[0]
        assert parallel.result == serial.result
        assert parallel.fingerprint == serial.fingerprint
        assert canonical_bytes(parallel) == canonical_bytes(serial)


def test_degenerate_delta_returns_the_grid_floor(runner):
    result = runner.invoke(cli, ["find-sigma", "--t", "5", "--k", "2", "--epsilon", "1", "--delta", "1.0"])
    assert result.exit_code == 0, result.output
    (record,) = records(result)
    assert record.result.sigma == settings.sigma_floor
    assert "degenerate" in record.result.note


def test_find_sigma_twice_gives_identical_bytes(runner):
    args = ["find-sigma", "--t", "1", "--k", "1", "--epsilon", "1", "--delta", "0.01", "--mode", "optimistic",
            "--samples", "20000", "--coarse-samples", "10000", "--seed", "9", "--threads", "1", "--no-runtime"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0, first.output
    assert first.stdout == second.stdout
    (record,) = records(first)
    assert record.runtime is None
    assert record.result.status == SearchMode.OPTIMISTIC


def test_bracket_failure_exits_with_one(runner, monkeypatch):
    def fail(*args, **kwargs):
        raise BracketError("no passing sigma")

    monkeypatch.setattr(find_sigma_module, "find_min_sigma", fail)
    result = runner.invoke(cli, ["find-sigma", "--t", "1", "--k", "1", "--epsilon", "1", "--delta", "0.01"])
    assert result.exit_code == 1


def test_coarse_samples_below_minimum_is_a_usage_error(runner):
    result = runner.invoke(
        cli, ["find-sigma", "--t", "1", "--k", "1", "--epsilon", "1", "--delta", "0.01", "--coarse-samples", "10"]
    )
    assert result.exit_code == 2


def test_batch_rows_are_emitted_in_input_order(runner, tmp_path):
    batch = tmp_path / "batch.csv"
    batch.write_text("t,k,sigma,epsilon,seed\n3,1,1.0,1.0,1\n2,2,2.0,0.5,2\n")
    result = runner.invoke(cli, ["estimate-delta", "--batch", str(batch), "--samples", "5000", "--threads", "1"])
    assert result.exit_code == 0, result.output
    first, second = records(result)
    assert (first.config["T"], first.config["k"]) == (3, 1)
    assert (second.config["T"], second.config["sigma"]) == (2, 2.0)
    assert first.config["samples"] == second.config["samples"] == 5000


def test_output_file_passes_the_record_check(runner, tmp_path):
    output = tmp_path / "records.ndjson"
    result = runner.invoke(
        cli,
        ["estimate-delta", "--t", "2", "--k", "1", "--sigma", "1", "--epsilon", "1", "--samples", "2000",
         "--threads", "1", "--output", str(output)],
    )
    assert result.exit_code == 0, result.output
    assert result.stdout == ""
    checked = runner.invoke(cli, ["check-records", str(output)])
    assert checked.exit_code == 0
    assert "1 valid, 0 invalid" in checked.stdout


def test_record_check_rejects_broken_lines(runner, tmp_path):
    broken = tmp_path / "broken.ndjson"
    broken.write_text('{"command": "estimate-delta", "config": {}}\n')
    assert runner.invoke(cli, ["check-records", str(broken)]).exit_code == 1


def test_table_format_lists_the_estimate(runner):
    result = runner.invoke(
        cli,
        ["estimate-delta", "--t", "2", "--k", "1", "--sigma", "1", "--epsilon", "1", "--samples", "2000",
         "--threads", "1", "--format", "table"],
    )
    assert result.exit_code == 0, result.output
    assert "delta_hat" in result.stdout
    assert "ucb" in result.stdout


def test_search_table_carries_reference_columns():
    config = {"T": 176, "k": 3, "epsilon": 8.0, "delta_target": 8.33e-6}
    result = NoiseSearchResult(sigma=0.505, status=SearchMode.OPTIMISTIC)
    table = format_table([build_record("find-sigma", config, result, 1.0, 1)])
    assert "Poisson" in table
    assert "0.56" in table
    assert "+9.8%" in table


def test_record_lines_are_single_line_json(runner):
    result = runner.invoke(
        cli, ["estimate-delta", "--t", "1", "--k", "1", "--sigma", "2", "--epsilon", "1", "--samples", "1000",
              "--threads", "1"],
    )
    lines = result.stdout.splitlines()
    assert len(lines) == 1
    payload = orjson.loads(lines[0])
    assert payload["artifact_version"]
    assert len(payload["fingerprint"]) == 64


def test_reference_table_and_batch(runner):
    table = runner.invoke(cli, ["reference"])
    assert table.exit_code == 0
    assert "0.505" in table.stdout
    batch = runner.invoke(cli, ["reference", "--as-batch"])
    assert batch.stdout.splitlines()[0] == "t,k,epsilon,delta,mode"


def test_validate_passes_on_a_correct_build(runner):
    result = runner.invoke(cli, ["validate", "--max-t", "6", "--instances", "5000", "--threads", "1"])
    assert result.exit_code == 0, result.output
    assert "FAIL" not in result.stdout
    assert "PASS dominance" in result.stdout


def test_validate_default_sweep_covers_t_up_to_sixteen(runner):
    result = runner.invoke(cli, ["validate", "--threads", "1"])
    assert result.exit_code == 0, result.output
    assert "PASS enumeration-equivalence: 136 (T, k) pairs x 100 vectors" in result.stdout


def test_validate_catches_an_inverted_screening_bound(runner):
    result = runner.invoke(
        cli, ["validate", "--max-t", "4", "--instances", "2000", "--inject-fault", "screening-inverted", "--threads", "1"]
    )
    assert result.exit_code == 1
    assert "FAIL dominance" in result.stdout

"""CLI surface: subcommands, exit codes, report emission, ledger dump."""

import json

from click.testing import CliRunner

from qbsim.cli import main
from qbsim.qbc import bell_pair_scheme, product_scheme, save_scheme


def json_line(output: str) -> dict:
    """The report/aggregate is the single canonical-JSON line on stdout;
    CliRunner interleaves the stderr wall-time note, so pick the JSON."""
    return json.loads(next(l for l in output.splitlines() if l.startswith("{")))


def test_lottery_run_emits_valid_report_and_exit_zero():
    runner = CliRunner()
    result = runner.invoke(main, ["lottery", "run", "--players", "2",
                                  "--ticket-bits", "4", "--miners", "1",
                                  "--seed", "5"])
    assert result.exit_code == 0
    report = json_line(result.output)
    assert report["protocol"] == "lottery"
    assert len(report["outcome"]["winning_ticket"]) == 4


def test_lottery_run_cheater_exit_code_two():
    runner = CliRunner()
    result = runner.invoke(main, ["lottery", "run", "--players", "2",
                                  "--ticket-bits", "4", "--miners", "1",
                                  "--player-policy", "0=equivocate:0000:1111"])
    assert result.exit_code == 2


def test_invalid_config_exit_code_one_with_diagnostics():
    runner = CliRunner()
    result = runner.invoke(main, ["lottery", "run", "--players", "1",
                                  "--ticket-bits", "0"])
    assert result.exit_code == 1


def test_same_seed_same_bytes_on_stdout():
    runner = CliRunner()
    args = ["auction", "run", "--buyers", "3", "--miners", "2", "--seed", "9"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    line = lambda r: next(l for l in r.output.splitlines() if l.startswith("{"))
    assert line(first) == line(second)


def test_auction_cheating_seller_exit_two():
    runner = CliRunner()
    result = runner.invoke(main, [
        "auction", "run", "--buyers", "3", "--miners", "1",
        "--seller-policy", "wrong-winner",
        "--buyer-policy", "0=fixed:3", "--buyer-policy", "1=fixed:7",
        "--buyer-policy", "2=fixed:5"])
    assert result.exit_code == 2


def test_stats_subcommands_emit_aggregates():
    runner = CliRunner()
    result = runner.invoke(main, ["lottery", "stats", "--runs", "20",
                                  "--players", "2", "--ticket-bits", "2",
                                  "--miners", "1"])
    assert result.exit_code == 0
    agg = json_line(result.output)
    assert agg["runs"] == 20
    assert len(agg["bit_one_frequencies"]) == 2

    result = runner.invoke(main, ["auction", "stats", "--runs", "10",
                                  "--buyers", "2", "--miners", "1"])
    agg = json_line(result.output)
    assert agg["runs"] == 10


def test_qbc_analyze_bell_and_product(tmp_path):
    runner = CliRunner()
    bell = tmp_path / "bell.json"
    save_scheme(bell_pair_scheme(), str(bell))
    result = runner.invoke(main, ["qbc", "analyze", str(bell)])
    assert result.exit_code == 0
    analysis = json_line(result.output)["analysis"]
    assert analysis["concealing_defect"] < 1e-10
    assert analysis["binding_strength"] < 1e-6

    prod = tmp_path / "product.json"
    save_scheme(product_scheme(), str(prod))
    result = runner.invoke(main, ["qbc", "analyze", str(prod)])
    analysis = json_line(result.output)["analysis"]
    assert abs(analysis["concealing_defect"] - 1.0) < 1e-10
    assert abs(analysis["binding_strength"] - 1.0) < 1e-6


def test_config_file_roundtrip(tmp_path):
    runner = CliRunner()
    config_path = tmp_path / "scenario.json"
    config_path.write_text(json.dumps({
        "protocol": "lottery", "players": 2, "ticket_bits": 3,
        "miners": 1, "seed": 11}))
    result = runner.invoke(main, ["lottery", "run", "--config", str(config_path)])
    assert result.exit_code == 0
    report = json_line(result.output)
    assert report["config"]["seed"] == 11


def test_ledger_dump_renders_records(tmp_path):
    runner = CliRunner()
    report_path = tmp_path / "report.json"
    result = runner.invoke(main, ["lottery", "run", "--players", "2",
                                  "--ticket-bits", "4", "--miners", "2",
                                  "--seed", "3", "--out", str(report_path)])
    assert result.exit_code == 0
    dump = runner.invoke(main, ["ledger", "dump", "--report", str(report_path)])
    assert dump.exit_code == 0
    assert "ledger of miner:0" in dump.output
    assert "ticket list" in dump.output
    as_json = runner.invoke(main, ["ledger", "dump", "--report", str(report_path),
                                   "--json"])
    parsed = json_line(as_json.output)
    assert "miner:0" in parsed and "miner:1" in parsed

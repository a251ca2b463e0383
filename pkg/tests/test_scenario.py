"""Config round-trips, report determinism, schema validation, batching."""

import json

import pytest

from qbsim.batch import run_batch
from qbsim.errors import ConfigError
from qbsim.scenario import (
    ScenarioConfig,
    canonical_report_bytes,
    run_scenario,
    validate_report,
)


def lottery_config(**kw):
    base = dict(protocol="lottery", players=3, ticket_bits=8, miners=2, seed=7)
    base.update(kw)
    return ScenarioConfig(**base)


def auction_config(**kw):
    base = dict(protocol="auction", buyers=3, miners=2, seed=7)
    base.update(kw)
    return ScenarioConfig(**base)


def test_config_roundtrip_through_json():
    config = lottery_config(player_policies={"0": "fixed:01010101"})
    data = json.loads(json.dumps(config.to_dict()))
    assert ScenarioConfig.from_dict(data) == config


def test_config_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"protocol": "lottery", "difficulty": 9000})


def test_validation_lists_every_violation():
    config = ScenarioConfig(protocol="lottery", players=0, ticket_bits=0,
                            miners=0, backend="sha256", cheat_policy="retry")
    problems = config.violations()
    assert len(problems) == 5
    with pytest.raises(ConfigError) as err:
        config.validated()
    assert len(err.value.violations) == 5


def test_zero_buyers_rejected_with_diagnostic():
    config = ScenarioConfig(protocol="auction", buyers=0, miners=1)
    with pytest.raises(ConfigError) as err:
        run_scenario(config)
    assert any("at least 2 buyers" in v for v in err.value.violations)


def test_minimal_lottery_report_complete():
    report = run_scenario(ScenarioConfig(protocol="lottery", players=2,
                                         ticket_bits=1, miners=1, seed=3))
    validate_report(report)
    assert report["protocol"] == "lottery"
    assert len(report["outcome"]["winning_ticket"]) == 1
    assert report["assertions"]["honest_ledgers_consistent"] is True


def test_same_seed_byte_identical_reports():
    config = lottery_config()
    a = canonical_report_bytes(run_scenario(config))
    b = canonical_report_bytes(run_scenario(lottery_config()))
    assert a == b
    c = canonical_report_bytes(run_scenario(lottery_config(seed=8)))
    assert a != c


def test_auction_report_same_seed_byte_identical():
    a = canonical_report_bytes(run_scenario(auction_config()))
    b = canonical_report_bytes(run_scenario(auction_config()))
    assert a == b
    validate_report(run_scenario(auction_config()))


def test_adversarial_reports_validate_and_note_cheaters():
    report = run_scenario(lottery_config(
        player_policies={"1": "equivocate:00000000:11111111"}))
    validate_report(report)
    assert report["cheaters"] == ["player:1"]
    report = run_scenario(auction_config(seller_policy="inflate",
                                         buyer_policies={"0": "fixed:3", "1": "fixed:7",
                                                         "2": "fixed:5"}))
    validate_report(report)
    assert "seller:0" in report["cheaters"]


def test_qbc_analyze_scenario_inline_scheme():
    from qbsim.qbc import bell_pair_scheme, scheme_to_dict

    config = ScenarioConfig(protocol="qbc_analyze",
                            scheme=scheme_to_dict(bell_pair_scheme()))
    report = run_scenario(config)
    validate_report(report)
    analysis = report["analysis"]
    assert analysis["concealing_defect"] < 1e-10
    assert analysis["binding_strength"] < 1e-6
    assert analysis["witness_residual"] < 1e-6


def test_byzantine_miner_config_end_to_end():
    # one equivocating miner among four cannot disturb an honest lottery
    config = lottery_config(miners=4, byzantine_miners={"0": "equivocate"})
    report = run_scenario(config)
    validate_report(report)
    assert report["consensus"]["f_actual"] == 1
    assert not report["consensus"]["guarantees_void"]
    assert report["assertions"]["honest_ledgers_consistent"] is True
    honest = run_scenario(lottery_config(miners=4))
    assert report["outcome"]["winning_ticket"] == honest["outcome"]["winning_ticket"]

    # same for an auction with a silent miner
    config = auction_config(miners=4, byzantine_miners={"2": "silent"},
                            buyer_policies={"0": "fixed:3", "1": "fixed:7",
                                            "2": "fixed:5"})
    report = run_scenario(config)
    assert report["outcome"]["verdict"] == "valid"
    assert report["outcome"]["winning_bid"] == 7


def test_byzantine_config_validation():
    bad = lottery_config(miners=2, byzantine_miners={"5": "equivocate",
                                                     "0": "bribe"})
    problems = bad.violations()
    assert any("unknown miner" in p for p in problems)
    assert any("unknown script" in p for p in problems)
    all_byz = lottery_config(miners=2, byzantine_miners={"0": "silent",
                                                         "1": "silent"})
    assert any("honest miner" in p for p in all_byz.violations())


def test_boundary_fault_set_flags_guarantees_void():
    config = lottery_config(miners=3, byzantine_miners={"1": "garbage"})
    report = run_scenario(config)
    assert report["consensus"]["guarantees_void"] is True


def test_batch_single_run_equals_run():
    config = lottery_config(detail_log=False)
    agg = run_batch(config, runs=1)
    assert agg["runs"] == 1
    assert agg["decided_runs"] == 1
    assert len(agg["bit_one_counts"]) == 8


def test_batch_aggregates_independent_of_workers():
    config = lottery_config(detail_log=False)
    seq = run_batch(config, runs=24, workers=1)
    par = run_batch(config, runs=24, workers=2)
    assert canonical_report_bytes(seq) == canonical_report_bytes(par)


def test_auction_batch_counts_winners():
    config = auction_config(detail_log=False,
                            buyer_policies={"0": "fixed:4", "1": "fixed:4"},
                            buyers=2)
    agg = run_batch(config, runs=30)
    assert agg["runs"] == 30
    assert sum(agg["winner_counts"].values()) == 30
    assert set(agg["winner_counts"]) <= {"0", "1"}

"""Scenario configuration and run reports.

A ScenarioConfig fully describes one run (protocol, party counts,
policies, seed, backend); it round-trips losslessly through JSON.
Reports are emitted in canonical JSON (sorted keys, fixed separators)
so a repeated run with the same config is byte-identical; the timing
section carries logical counters only, wall-clock time never enters the
canonical bytes.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import jsonschema

from . import __version__
from .auction import (
    AuctionParams,
    SellerPolicy,
    bid_privacy_violations,
    complaint_openings,
    parse_buyer_policy,
    posterior_privacy_violations,
    run_auction,
)
from .commitment import parse_backend
from .consensus import MINER_SCRIPT_NAMES
from .errors import ConfigError, QbsimError
from .lottery import LotteryParams, parse_player_policy, run_lottery
from .parties import miner
from .qbc import binding_attack, concealing_defect, scheme_from_dict
from .qbc.io import load_scheme

SCHEMA_VERSION = 1

PROTOCOLS = ("lottery", "auction", "qbc_analyze")


@dataclass
class ScenarioConfig:
    protocol: str
    seed: int = 0
    miners: int = 1
    backend: str = "ideal"
    key_budget: int = 65536
    detail_log: bool = True
    # lottery
    players: int = 0
    ticket_bits: int = 0
    player_policies: dict[str, str] = field(default_factory=dict)
    cheat_policy: str = "exclude"
    # auction
    buyers: int = 0
    bid_width: int = 32
    buyer_policies: dict[str, str] = field(default_factory=dict)
    seller_policy: str = "honest"
    # consensus fault set: miner index -> script name
    byzantine_miners: dict[str, str] = field(default_factory=dict)
    # qbc analysis
    scheme: dict | None = None
    scheme_file: str | None = None

    # ------------------------------------------------------------- codec

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError([f"unknown config field {k!r}" for k in sorted(unknown)])
        return cls(**data)

    @classmethod
    def load(cls, path: str) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fp:
            return cls.from_dict(json.load(fp))

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(self.to_dict(), fp, indent=2, sort_keys=True)
            fp.write("\n")

    # -------------------------------------------------------- validation

    def violations(self) -> list[str]:
        """Every violated constraint, not just the first."""
        out = []
        if self.protocol not in PROTOCOLS:
            out.append(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
            return out
        if self.seed < 0:
            out.append("seed must be non-negative")
        if self.key_budget < 1:
            out.append("key budget must be positive")
        try:
            parse_backend(self.backend)
        except QbsimError as exc:
            out.append(str(exc))
        if self.protocol in ("lottery", "auction"):
            for key, script in sorted(self.byzantine_miners.items()):
                if not key.isdigit() or not 0 <= int(key) < max(self.miners, 0):
                    out.append(f"byzantine script for unknown miner {key!r}")
                if script not in MINER_SCRIPT_NAMES:
                    out.append(f"miner {key}: unknown script {script!r} "
                               f"(expected one of {MINER_SCRIPT_NAMES})")
            if self.miners >= 1 and len(self.byzantine_miners) >= self.miners:
                out.append("at least one honest miner is required")
        if self.protocol == "lottery":
            if self.players < 2:
                out.append(f"a lottery needs at least 2 players, got {self.players}")
            if self.ticket_bits < 1:
                out.append(f"tickets need at least 1 bit, got {self.ticket_bits}")
            if self.miners < 1:
                out.append(f"a lottery needs at least 1 miner, got {self.miners}")
            if self.cheat_policy not in ("exclude", "abort"):
                out.append(f"cheat policy must be exclude|abort, got {self.cheat_policy!r}")
            for key, text in sorted(self.player_policies.items()):
                if not key.isdigit() or not 0 <= int(key) < max(self.players, 0):
                    out.append(f"player policy for unknown player {key!r}")
                    continue
                if self.ticket_bits >= 1:
                    try:
                        parse_player_policy(text, self.ticket_bits)
                    except QbsimError as exc:
                        out.append(f"player {key}: {exc}")
        elif self.protocol == "auction":
            if self.buyers < 2:
                out.append(f"an auction needs at least 2 buyers, got {self.buyers}")
            if not 1 <= self.bid_width <= 64:
                out.append(f"bid width must be in [1, 64], got {self.bid_width}")
            if self.miners < 1:
                out.append(f"an auction needs at least 1 miner, got {self.miners}")
            try:
                SellerPolicy(self.seller_policy)
            except ValueError:
                out.append(f"unknown seller policy {self.seller_policy!r}")
            for key, text in sorted(self.buyer_policies.items()):
                if not key.isdigit() or not 0 <= int(key) < max(self.buyers, 0):
                    out.append(f"buyer policy for unknown buyer {key!r}")
                    continue
                try:
                    parse_buyer_policy(text)
                except QbsimError as exc:
                    out.append(f"buyer {key}: {exc}")
        else:  # qbc_analyze
            if self.scheme is None and self.scheme_file is None:
                out.append("qbc_analyze needs an inline scheme or a scheme_file")
        return out

    def validated(self) -> "ScenarioConfig":
        problems = self.violations()
        if problems:
            raise ConfigError(problems)
        return self

    # ------------------------------------------------------- param views

    def _fault_set(self) -> tuple[frozenset, dict]:
        byzantine = frozenset(miner(int(k)) for k in self.byzantine_miners)
        scripts = {miner(int(k)): name for k, name in self.byzantine_miners.items()}
        return byzantine, scripts

    def lottery_params(self) -> LotteryParams:
        policies = {
            int(k): parse_player_policy(text, self.ticket_bits)
            for k, text in self.player_policies.items()
        }
        byzantine, scripts = self._fault_set()
        return LotteryParams(
            players=self.players, ticket_bits=self.ticket_bits, miners=self.miners,
            seed=self.seed, backend=parse_backend(self.backend), policies=policies,
            cheat_policy=self.cheat_policy, key_budget=self.key_budget,
            detail=self.detail_log, byzantine_miners=byzantine, miner_scripts=scripts)

    def auction_params(self) -> AuctionParams:
        policies = {
            int(k): parse_buyer_policy(text)
            for k, text in self.buyer_policies.items()
        }
        byzantine, scripts = self._fault_set()
        return AuctionParams(
            buyers=self.buyers, bid_width=self.bid_width, miners=self.miners,
            seed=self.seed, backend=parse_backend(self.backend),
            buyer_policies=policies, seller_policy=SellerPolicy(self.seller_policy),
            key_budget=self.key_budget, detail=self.detail_log,
            byzantine_miners=byzantine, miner_scripts=scripts)


# ------------------------------------------------------------ run report


def _consensus_section(result) -> dict:
    return {
        "f_tolerance": result.f_tolerance,
        "f_actual": result.f_actual,
        "guarantees_void": result.guarantees_void,
        "phases_run": result.phases_run,
        "decision_phase": result.decision_phase,
        "transcript": result.transcript,
    }


def _ledger_section(ledgers) -> dict:
    return {
        str(m): [record.to_dict() for record in led.records]
        for m, led in sorted(ledgers.items())
    }


def run_scenario(config: ScenarioConfig) -> dict:
    """Execute the configured protocol end to end and build the report."""
    config = config.validated()
    report: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "qbsim_version": __version__,
        "config": config.to_dict(),
        "protocol": config.protocol,
    }

    if config.protocol == "qbc_analyze":
        scheme = (load_scheme(config.scheme_file) if config.scheme is None
                  else scheme_from_dict(config.scheme))
        attack = binding_attack(scheme)
        report["analysis"] = {
            "dim_a": scheme.dims.dim_a,
            "dim_b": scheme.dims.dim_b,
            "concealing_defect": concealing_defect(scheme),
            "binding_strength": attack.strength,
            "best_cheat_overlap": attack.best_overlap,
            "witness_residual": attack.witness_residual,
            "witness_unitary": [[[float(z.real), float(z.imag)] for z in row]
                                for row in attack.witness_unitary],
            "open_distinguishability": scheme.open_distinguishability,
        }
        report["cheaters"] = []
        report["timing"] = {"events": 0, "messages_sent": 0, "messages_delivered": 0}
        return report

    if config.protocol == "lottery":
        result = run_lottery(config.lottery_params())
        consistent, divergence = result.honest_ledgers_consistent
        report.update({
            "outcome": result.outcome.to_dict(),
            "verdicts": {str(m): v.to_dict() for m, v in sorted(result.verdicts.items())},
            "decided_body": result.decided_body.hex(),
            "cheaters": [str(p) for p in result.cheaters],
            "consensus": _consensus_section(result.consensus),
            "ledgers": _ledger_section(result.ledgers),
            "assertions": {
                "honest_ledgers_consistent": consistent,
                "divergence_height": divergence,
            },
        })
        ctx = result.context
    else:
        result = run_auction(config.auction_params())
        consistent, divergence = result.honest_ledgers_consistent
        assertions = {
            "honest_ledgers_consistent": consistent,
            "divergence_height": divergence,
        }
        if config.detail_log:
            assertions["posterior_privacy_violations"] = posterior_privacy_violations(result)
            assertions["bid_privacy_violations"] = bid_privacy_violations(result)
            assertions["complaint_openings"] = complaint_openings(result)
        report.update({
            "outcome": result.outcome.to_dict(),
            "per_miner_outputs": {str(m): o.to_dict()
                                  for m, o in sorted(result.per_miner_outputs.items())},
            "decided_body": result.decided_body.hex(),
            "cheaters": [str(p) for p in result.cheaters],
            "false_accusers": [str(p) for p in result.false_accusers],
            "excluded_buyers": [str(p) for p in result.excluded_buyers],
            "degenerate_seller_policy": result.degenerate_policy,
            "consensus": _consensus_section(result.consensus),
            "ledgers": _ledger_section(result.ledgers),
            "assertions": assertions,
        })
        ctx = result.context

    report["event_log"] = ctx.log.to_list()
    report["event_counters"] = dict(sorted(ctx.log.counters.items()))
    report["timing"] = {
        "events": ctx.log.total_events,
        "messages_sent": ctx.network.messages_sent,
        "messages_delivered": ctx.network.messages_delivered,
    }
    return report


def canonical_report_bytes(report: dict) -> bytes:
    return (json.dumps(report, sort_keys=True, separators=(",", ":"),
                       ensure_ascii=True) + "\n").encode("ascii")


_SCHEMA_CACHE: dict[str, dict] = {}


def _schema(name: str) -> dict:
    if name not in _SCHEMA_CACHE:
        ref = importlib.resources.files("qbsim.schemas").joinpath(name)
        _SCHEMA_CACHE[name] = json.loads(ref.read_text(encoding="utf-8"))
    return _SCHEMA_CACHE[name]


def validate_report(report: dict):
    jsonschema.validate(report, _schema("run_report.schema.json"))


def validate_config_dict(data: dict):
    jsonschema.validate(data, _schema("scenario_config.schema.json"))


def emit_report(report: dict, fp):
    """Validate against the published schema, then write canonical bytes."""
    validate_report(report)
    fp.write(canonical_report_bytes(report))

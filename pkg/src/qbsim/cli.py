"""Operator entry point.

Subcommands: `lottery run|stats`, `auction run|stats`, `qbc analyze`,
`ledger dump`. Exit codes: 0 - run completed with no property
violations; 2 - a cheater was detected (expected in adversarial
scenarios, detailed in the report); 1 - invalid input or internal
error.
"""

from __future__ import annotations

import json
import sys
import time

import click

from .batch import run_batch
from .encoding import decode_ticket_list, decode_verification_output
from .errors import ConfigError, QbsimError
from .ledger import RecordKind
from .scenario import (
    ScenarioConfig,
    canonical_report_bytes,
    emit_report,
    run_scenario,
    validate_config_dict,
)


def _finish_run(config: ScenarioConfig, out: str | None) -> int:
    started = time.perf_counter()
    report = run_scenario(config)
    elapsed = time.perf_counter() - started
    if out:
        with open(out, "wb") as fp:
            emit_report(report, fp)
        click.echo(f"report written to {out}", err=True)
    else:
        emit_report(report, sys.stdout.buffer)
    click.echo(f"completed in {elapsed:.3f}s wall time", err=True)
    if report["cheaters"]:
        click.echo(f"cheaters detected: {', '.join(report['cheaters'])}", err=True)
        return 2
    return 0


def _config_from_file(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fp:
        data = json.load(fp)
    validate_config_dict(data)
    return ScenarioConfig.from_dict(data)


def _policy_map(pairs) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError([f"policy must look like INDEX=SPEC, got {pair!r}"])
        index, spec = pair.split("=", 1)
        out[index] = spec
    return out


@click.group()
def main():
    """Deterministic lottery/auction simulator on an authenticated
    quantum-blockchain stack."""


# ---------------------------------------------------------------- lottery


@main.group()
def lottery():
    """Commit-reveal lottery scenarios."""


def _lottery_config(players, ticket_bits, miners, seed, backend, policy,
                    player_policy, byzantine, key_budget, summary_log) -> ScenarioConfig:
    return ScenarioConfig(
        protocol="lottery", players=players, ticket_bits=ticket_bits,
        miners=miners, seed=seed, backend=backend, cheat_policy=policy,
        player_policies=_policy_map(player_policy),
        byzantine_miners=_policy_map(byzantine), key_budget=key_budget,
        detail_log=not summary_log)


_lottery_options = [
    click.option("--players", "-n", default=3, show_default=True, help="number of players"),
    click.option("--ticket-bits", "-m", default=8, show_default=True, help="bits per ticket"),
    click.option("--miners", "-k", default=2, show_default=True, help="number of miners"),
    click.option("--seed", "-s", default=0, show_default=True, help="scenario master seed"),
    click.option("--backend", default="ideal", show_default=True,
                 help="commitment backend: ideal or cheat:<p>"),
    click.option("--policy", default="exclude", show_default=True,
                 type=click.Choice(["exclude", "abort"]), help="cheat handling policy"),
    click.option("--player-policy", multiple=True, metavar="INDEX=SPEC",
                 help="honest | fixed:BITS | equivocate:BITS:BITS (repeatable)"),
    click.option("--byzantine", multiple=True, metavar="INDEX=SCRIPT",
                 help="Byzantine miner scripts: silent|garbage|equivocate (repeatable)"),
    click.option("--key-budget", default=65536, show_default=True,
                 help="one-time key blocks per party pair"),
]


def _apply(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@lottery.command("run")
@_apply(_lottery_options)
@click.option("--summary-log", is_flag=True, help="keep event counters only")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="load the full scenario config from a JSON file")
@click.option("--out", type=click.Path(), help="write the report here instead of stdout")
def lottery_run(players, ticket_bits, miners, seed, backend, policy,
                player_policy, byzantine, key_budget, summary_log, config_path, out):
    """Run one lottery scenario and emit its report."""
    config = (_config_from_file(config_path) if config_path else
              _lottery_config(players, ticket_bits, miners, seed, backend, policy,
                              player_policy, byzantine, key_budget, summary_log))
    sys.exit(_finish_run(config, out))


@lottery.command("stats")
@_apply(_lottery_options)
@click.option("--runs", "-N", default=1000, show_default=True)
@click.option("--workers", "-K", default=1, show_default=True)
@click.option("--out", type=click.Path(), help="write the aggregate here instead of stdout")
def lottery_stats(players, ticket_bits, miners, seed, backend, policy,
                  player_policy, byzantine, key_budget, runs, workers, out):
    """Aggregate winning-bit frequencies and chi-square over many runs."""
    config = _lottery_config(players, ticket_bits, miners, seed, backend, policy,
                             player_policy, byzantine, key_budget, summary_log=True)
    started = time.perf_counter()
    agg = run_batch(config, runs=runs, workers=workers)
    click.echo(f"{runs} runs in {time.perf_counter() - started:.3f}s wall time", err=True)
    data = canonical_report_bytes(agg)
    if out:
        with open(out, "wb") as fp:
            fp.write(data)
    else:
        sys.stdout.buffer.write(data)


# ---------------------------------------------------------------- auction


@main.group()
def auction():
    """Sealed-bid auction scenarios."""


def _auction_config(buyers, bid_width, miners, seed, backend, seller_policy,
                    buyer_policy, byzantine, key_budget, summary_log) -> ScenarioConfig:
    return ScenarioConfig(
        protocol="auction", buyers=buyers, bid_width=bid_width, miners=miners,
        seed=seed, backend=backend, seller_policy=seller_policy,
        buyer_policies=_policy_map(buyer_policy),
        byzantine_miners=_policy_map(byzantine), key_budget=key_budget,
        detail_log=not summary_log)


_auction_options = [
    click.option("--buyers", "-m", default=3, show_default=True),
    click.option("--bid-width", "-w", default=32, show_default=True,
                 help="bids range over [1, 2^w - 1]"),
    click.option("--miners", "-k", default=2, show_default=True),
    click.option("--seed", "-s", default=0, show_default=True),
    click.option("--backend", default="ideal", show_default=True,
                 help="commitment backend: ideal or cheat:<p>"),
    click.option("--seller-policy", default="honest", show_default=True,
                 type=click.Choice(["honest", "wrong-winner", "inflate", "drop-loser"])),
    click.option("--buyer-policy", multiple=True, metavar="INDEX=SPEC",
                 help="honest | fixed:V | change:V:W | complain:V (repeatable)"),
    click.option("--byzantine", multiple=True, metavar="INDEX=SCRIPT",
                 help="Byzantine miner scripts: silent|garbage|equivocate (repeatable)"),
    click.option("--key-budget", default=65536, show_default=True),
]


@auction.command("run")
@_apply(_auction_options)
@click.option("--summary-log", is_flag=True, help="keep event counters only")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="load the full scenario config from a JSON file")
@click.option("--out", type=click.Path(), help="write the report here instead of stdout")
def auction_run(buyers, bid_width, miners, seed, backend, seller_policy,
                buyer_policy, byzantine, key_budget, summary_log, config_path, out):
    """Run one auction scenario and emit its report."""
    config = (_config_from_file(config_path) if config_path else
              _auction_config(buyers, bid_width, miners, seed, backend, seller_policy,
                              buyer_policy, byzantine, key_budget, summary_log))
    sys.exit(_finish_run(config, out))


@auction.command("stats")
@_apply(_auction_options)
@click.option("--runs", "-N", default=1000, show_default=True)
@click.option("--workers", "-K", default=1, show_default=True)
@click.option("--out", type=click.Path(), help="write the aggregate here instead of stdout")
def auction_stats(buyers, bid_width, miners, seed, backend, seller_policy,
                  buyer_policy, byzantine, key_budget, runs, workers, out):
    """Aggregate winner frequencies and detection rates over many runs."""
    config = _auction_config(buyers, bid_width, miners, seed, backend, seller_policy,
                             buyer_policy, byzantine, key_budget, summary_log=True)
    started = time.perf_counter()
    agg = run_batch(config, runs=runs, workers=workers)
    click.echo(f"{runs} runs in {time.perf_counter() - started:.3f}s wall time", err=True)
    data = canonical_report_bytes(agg)
    if out:
        with open(out, "wb") as fp:
            fp.write(data)
    else:
        sys.stdout.buffer.write(data)


# -------------------------------------------------------------------- qbc


@main.group()
def qbc():
    """Numerical commitment-scheme analysis."""


@qbc.command("analyze")
@click.argument("scheme_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="write the report here instead of stdout")
def qbc_analyze(scheme_file, out):
    """Measure how concealing and how binding a scheme file is."""
    config = ScenarioConfig(protocol="qbc_analyze", scheme_file=scheme_file)
    sys.exit(_finish_run(config, out))


# ----------------------------------------------------------------- ledger


@main.group()
def ledger():
    """Inspect ledgers from saved run reports."""


def _render_body(kind: str, body: bytes) -> str:
    if kind == RecordKind.TICKET_LIST.value:
        entries = decode_ticket_list(body)
        parts = []
        for index, status, ticket in entries:
            shown = ticket.text if ticket is not None else status
            parts.append(f"player {index}: {shown}")
        return "ticket list [" + "; ".join(parts) + "]"
    decoded = decode_verification_output(body)
    if not decoded["valid"]:
        return f"auction outcome: bot, cheater {decoded['cheater']}"
    losers = ", ".join(str(v) for v in decoded["losing_bids"])
    return (f"auction outcome: winner {decoded['winner']} "
            f"bid {decoded['winning_bid']}, losing bids [{losers}]")


@ledger.command("dump")
@click.option("--report", "report_path", type=click.Path(exists=True), required=True,
              help="a report written by `lottery run --out` / `auction run --out`")
@click.option("--json", "as_json", is_flag=True, help="emit canonical JSON records")
def ledger_dump(report_path, as_json):
    """Print every miner's ledger: canonical encoding plus a rendering."""
    with open(report_path, "r", encoding="utf-8") as fp:
        report = json.load(fp)
    ledgers = report.get("ledgers")
    if ledgers is None:
        raise click.ClickException("this report carries no ledgers")
    if as_json:
        sys.stdout.buffer.write(canonical_report_bytes(ledgers))
        return
    for owner in sorted(ledgers):
        click.echo(f"== ledger of {owner}")
        for record in ledgers[owner]:
            body = bytes.fromhex(record["body"])
            click.echo(f"  height {record['height']} kind {record['kind']} "
                       f"origin {record['origin_consensus']}")
            click.echo(f"    canonical: {record['body']}")
            click.echo(f"    rendered:  {_render_body(record['kind'], body)}")


def entrypoint():
    try:
        main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except QbsimError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entrypoint()

"""Three-phase lottery: ticket purchasing, ticket agreement, winner
determination.

Players commit their m-bit tickets to every miner, later open to every
miner, miners agree on the full ticket list and append it, and the
winning ticket is the XOR of all agreed tickets. Revenue falls with the
Hamming distance to the winning ticket; shares use exact rationals and
sum to one.

A detected equivocator is handled by the configured policy: exclude
(default - drop the cheater, recompute over the remaining tickets) or
abort the run. Either way the agreed list, statuses included, is what
lands on the ledger, so the outcome stays a pure function of the ledger
record.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .bits import BitString, xor_all
from .commitment import Backend, parse_backend
from .consensus import (
    CodecDomain,
    ConsensusInstance,
    ConsensusResult,
    FaultModel,
    resolve_script,
    run_consensus,
)
from .encoding import (
    decode_payload,
    decode_ticket_list,
    encode_commit_notify,
    encode_open,
    encode_ticket_list,
)
from .errors import QbsimError
from .ledger import MinerLedger, RecordKind, ledgers_consistent
from .parties import PartyId, miner, player
from .runtime import SimContext, make_context

CHEAT_POLICY_EXCLUDE = "exclude"
CHEAT_POLICY_ABORT = "abort"


# ------------------------------------------------------- player policies


@dataclass(frozen=True)
class HonestPlayer:
    """Uniform random ticket, opened faithfully."""


@dataclass(frozen=True)
class FixedTicket:
    """Adversarially chosen ticket, opened faithfully."""

    ticket: BitString


@dataclass(frozen=True)
class Equivocator:
    """Commits one ticket, attempts to open another."""

    commit_ticket: BitString
    open_ticket: BitString


PlayerPolicy = HonestPlayer | FixedTicket | Equivocator


def parse_player_policy(text: str, ticket_bits: int) -> PlayerPolicy:
    if text == "honest":
        return HonestPlayer()
    if text.startswith("fixed:"):
        ticket = BitString.from_text(text.split(":", 1)[1])
    elif text.startswith("equivocate:"):
        _, first, second = text.split(":")
        t1, t2 = BitString.from_text(first), BitString.from_text(second)
        if len(t1) != ticket_bits or len(t2) != ticket_bits:
            raise QbsimError(f"policy tickets must have length {ticket_bits}")
        return Equivocator(t1, t2)
    else:
        raise QbsimError(f"unknown player policy {text!r}")
    if len(ticket) != ticket_bits:
        raise QbsimError(f"policy ticket must have length {ticket_bits}")
    return FixedTicket(ticket)


# ----------------------------------------------------------- pure pieces


def winning_ticket(tickets) -> BitString:
    """Position-wise XOR of all tickets."""
    return xor_all(tickets)


def hamming_distance(a: BitString, b: BitString) -> int:
    return a.hamming_distance(b)


def revenue_shares(distances, m: int) -> list[Fraction]:
    """share_i = (m - d_i + 1) / sum_j (m - d_j + 1), exact rationals.

    Strictly decreasing in distance, equal for equal distances, never
    zero, and the shares sum to exactly one.
    """
    distances = list(distances)
    for d in distances:
        if not 0 <= d <= m:
            raise QbsimError(f"distance {d} outside [0, {m}]")
    weights = [m - d + 1 for d in distances]
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


@dataclass(frozen=True)
class LotteryOutcome:
    """Winner determination applied to one agreed ticket list."""

    ticket_bits: int
    entries: tuple  # (player_index, status, BitString|None), ascending index
    cheat_policy: str
    aborted: bool
    included: tuple = ()
    excluded: tuple = ()
    winning: BitString | None = None
    distances: dict = field(default_factory=dict)
    revenues: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "aborted": self.aborted,
            "cheat_policy": self.cheat_policy,
            "ticket_bits": self.ticket_bits,
            "entries": [
                {"player": i, "status": status,
                 "ticket": ticket.text if ticket is not None else None}
                for i, status, ticket in self.entries
            ],
            "included": list(self.included),
            "excluded": list(self.excluded),
            "winning_ticket": self.winning.text if self.winning else None,
            "distances": {str(i): d for i, d in self.distances.items()},
            "revenues": {str(i): f"{r.numerator}/{r.denominator}"
                         for i, r in self.revenues.items()},
        }


def determine_outcome(entries, ticket_bits: int, cheat_policy: str) -> LotteryOutcome:
    """Pure function from an agreed ticket list to the outcome."""
    entries = tuple(entries)
    included = tuple(i for i, status, _ in entries if status == "opened")
    excluded = tuple(i for i, status, _ in entries if status != "opened")
    if excluded and cheat_policy == CHEAT_POLICY_ABORT:
        return LotteryOutcome(ticket_bits, entries, cheat_policy, aborted=True,
                              excluded=excluded)
    if not included:
        return LotteryOutcome(ticket_bits, entries, cheat_policy, aborted=True,
                              excluded=excluded)
    tickets = {i: ticket for i, status, ticket in entries if status == "opened"}
    winning = xor_all([tickets[i] for i in included])
    distances = {i: tickets[i].hamming_distance(winning) for i in included}
    shares = revenue_shares([distances[i] for i in included], ticket_bits)
    revenues = dict(zip(included, shares))
    for i in excluded:
        revenues[i] = Fraction(0)
    return LotteryOutcome(ticket_bits, entries, cheat_policy, aborted=False,
                          included=included, excluded=excluded, winning=winning,
                          distances=distances, revenues=revenues)


# -------------------------------------------------------------- protocol


@dataclass
class LotteryParams:
    players: int
    ticket_bits: int
    miners: int
    seed: int
    backend: Backend
    policies: dict[int, PlayerPolicy] = field(default_factory=dict)
    cheat_policy: str = CHEAT_POLICY_EXCLUDE
    key_budget: int = 65536
    detail: bool = True
    byzantine_miners: frozenset = frozenset()
    miner_scripts: dict = field(default_factory=dict)

    @classmethod
    def simple(cls, players, ticket_bits, miners, seed, backend="ideal", **kw):
        return cls(players=players, ticket_bits=ticket_bits, miners=miners,
                   seed=seed, backend=parse_backend(backend), **kw)


@dataclass
class LotteryRunResult:
    outcome: LotteryOutcome
    verdicts: dict  # miner -> LotteryOutcome recomputed from its ledger
    decided_body: bytes
    ledgers: dict
    cheaters: tuple
    consensus: ConsensusResult
    context: SimContext

    @property
    def honest_ledgers_consistent(self) -> tuple[bool, int | None]:
        honest = [self.ledgers[m] for m in sorted(self.ledgers)
                  if self.consensus.decisions.get(m) is not None]
        return ledgers_consistent(honest)


def _policy_tickets(params: LotteryParams, ctx: SimContext):
    commit_tickets, open_tickets = {}, {}
    for i in range(params.players):
        policy = params.policies.get(i, HonestPlayer())
        if isinstance(policy, HonestPlayer):
            ticket = BitString.random(ctx.rng("player", i), params.ticket_bits)
            commit_tickets[i] = open_tickets[i] = ticket
        elif isinstance(policy, FixedTicket):
            if len(policy.ticket) != params.ticket_bits:
                raise QbsimError(f"player {i} policy ticket length mismatch")
            commit_tickets[i] = open_tickets[i] = policy.ticket
        else:
            if (len(policy.commit_ticket) != params.ticket_bits
                    or len(policy.open_ticket) != params.ticket_bits):
                raise QbsimError(f"player {i} policy ticket length mismatch")
            commit_tickets[i] = policy.commit_ticket
            open_tickets[i] = policy.open_ticket
    return commit_tickets, open_tickets


def run_lottery(params: LotteryParams) -> LotteryRunResult:
    if params.players < 2:
        raise QbsimError("a lottery needs at least 2 players")
    if params.miners < 1:
        raise QbsimError("a lottery needs at least 1 miner")
    if params.ticket_bits < 1:
        raise QbsimError("tickets need at least 1 bit")
    if params.cheat_policy not in (CHEAT_POLICY_EXCLUDE, CHEAT_POLICY_ABORT):
        raise QbsimError(f"unknown cheat policy {params.cheat_policy!r}")

    players = [player(i) for i in range(params.players)]
    miners = [miner(j) for j in range(params.miners)]
    ctx = make_context(params.seed, players + miners, params.key_budget, params.detail)
    commit_tickets, open_tickets = _policy_tickets(params, ctx)

    # phase 1: ticket purchasing - commit to every miner
    ctx.log.append("phase", protocol="lottery", phase=1, name="ticket_purchasing")
    commitment_ids: dict[tuple[int, PartyId], int] = {}
    for i, p in enumerate(players):
        for m in miners:
            cid = ctx.registry.commit(p, m, commit_tickets[i], params.backend)
            commitment_ids[(i, m)] = cid
            ctx.network.send_authenticated(p, m, encode_commit_notify(cid, params.ticket_bits))

    miner_commitments: dict[PartyId, dict[int, int]] = {m: {} for m in miners}

    def on_commit(delivery):
        msg = decode_payload(delivery.payload)
        if msg["kind"] == "commit_notify":
            miner_commitments[delivery.receiver][delivery.sender.index] = msg["commitment_id"]

    ctx.network.drain(on_commit)

    # phase 2a: every player opens to every miner
    ctx.log.append("phase", protocol="lottery", phase=2, name="ticket_agreement")
    for i, p in enumerate(players):
        if open_tickets[i] != commit_tickets[i]:
            ctx.log.append("equivocate_attempt", player=str(p))
        for m in miners:
            ctx.network.send_authenticated(
                p, m, encode_open(commitment_ids[(i, m)], open_tickets[i]))

    miner_views: dict[PartyId, dict[int, tuple[str, BitString | None]]] = {
        m: {} for m in miners}

    def on_open(delivery):
        msg = decode_payload(delivery.payload)
        if msg["kind"] != "open":
            return
        result = ctx.registry.open(msg["commitment_id"], delivery.sender, msg["claimed"])
        if result.accepted:
            miner_views[delivery.receiver][delivery.sender.index] = ("opened", result.value)
        else:
            miner_views[delivery.receiver][delivery.sender.index] = ("cheat_detected", None)

    ctx.network.drain(on_open)

    # phase 2b: consensus on the ticket list, then append
    byzantine = frozenset(params.byzantine_miners)
    if len(byzantine & set(miners)) >= params.miners:
        raise QbsimError("at least one honest miner is required")
    instance = ConsensusInstance(0, miners, CodecDomain(decode_ticket_list))
    for m in miners:
        if m in byzantine:
            continue
        entries = []
        for i in range(params.players):
            status, ticket = miner_views[m].get(i, ("missing", None))
            entries.append((i, status, ticket))
        instance.propose(m, encode_ticket_list(entries))
    candidates = [instance.inputs[m] for m in sorted(instance.inputs)]
    scripts = {
        m: resolve_script(spec, ctx.rng("miner-script", m.index), candidates)
        for m, spec in sorted(params.miner_scripts.items())
    }
    fault_model = FaultModel(byzantine, scripts)
    consensus_result = run_consensus(instance, fault_model, ctx.network, ctx.log)

    ledgers = {m: MinerLedger(m) for m in miners}
    reference_miner = next(m for m in miners if consensus_result.decisions[m] is not None)
    decided_body = consensus_result.decisions[reference_miner]
    no_agreement = decided_body == b""
    if no_agreement:
        # only possible past the f < n/3 bound: the decided value is the
        # reserved "no valid input" element, so nothing is appendable and
        # the run aborts rather than fabricating a ticket list
        ctx.log.append("consensus_no_agreement", protocol="lottery")
    else:
        for m in miners:
            decided = consensus_result.decisions[m]
            if decided is None or decided == b"":
                continue
            ledgers[m].append_finalized(RecordKind.TICKET_LIST, decided, 0,
                                        decided_body=decided)
            ctx.log.append("ledger_append", miner=str(m), kind="ticket_list",
                           height=0, body=decided.hex())

    # phase 3: winner determination from each miner's own ledger copy
    ctx.log.append("phase", protocol="lottery", phase=3, name="winner_determination")
    verdicts = {}
    for m in miners:
        decided = consensus_result.decisions[m]
        if decided is None:
            continue
        if decided == b"":
            verdicts[m] = LotteryOutcome(params.ticket_bits, (), params.cheat_policy,
                                         aborted=True)
            continue
        body = ledgers[m].records[0].body
        verdicts[m] = determine_outcome(
            decode_ticket_list(body), params.ticket_bits, params.cheat_policy)

    outcome = verdicts[reference_miner]
    if outcome.excluded:
        ctx.log.append("cheat_policy_applied", policy=params.cheat_policy,
                       excluded=[i for i in outcome.excluded], aborted=outcome.aborted)

    cheaters = tuple(sorted(ctx.registry.cheat_detected_committers()))
    return LotteryRunResult(
        outcome=outcome,
        verdicts=verdicts,
        decided_body=decided_body,
        ledgers=ledgers,
        cheaters=cheaters,
        consensus=consensus_result,
        context=ctx,
    )

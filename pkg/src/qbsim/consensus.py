"""Byzantine agreement among the miners: multi-valued phase king.

The algorithm runs f_tol + 1 phases with f_tol = floor((n-1)/3), three
rounds per phase:

  round 1  everyone broadcasts its preference; a value seen at least
           n - f_tol times becomes the new preference (two distinct
           values cannot both reach that threshold when n > 3f), else
           the party marks itself undecided;
  round 2  everyone broadcasts preference-or-undecided; each party
           picks the most frequent concrete value d (ties to the
           lexicographically smallest encoding) and its count;
  round 3  the phase's king broadcasts its d; parties with fewer than
           n - f_tol supporting votes adopt the king's value, the rest
           keep their own d.

Any missing, unparseable or out-of-domain message counts as a vote for
the reserved domain element BOT (the empty byte string), so "no valid
input" is representable inside the domain. Agreement and validity hold
whenever fewer than n/3 participants are Byzantine; otherwise the run
completes but is flagged guarantees_void.

The reported decision_phase is the first phase after which every honest
preference already equals the final decision. The first f+1 kings
include an honest one (f = actual Byzantine count), and preferences
persist once the honest parties agree, so decision_phase <= f + 1; with
no faults and equal inputs it is 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encoding import decode_payload, encode_consensus
from .errors import ConsensusUsageError, EncodingError
from .eventlog import EventLog
from .parties import PartyId
from .transport import Network

BOT = b""  # reserved domain element: "no valid input"

_UNDECIDED = object()  # internal round-2 marker, never a domain value


class ExplicitDomain:
    """Finite candidate set; BOT is always a member."""

    def __init__(self, values):
        self.values = frozenset(bytes(v) for v in values) | {BOT}

    def contains(self, value: bytes) -> bool:
        return value in self.values


class CodecDomain:
    """Membership by validity of a canonical encoding (protocol domains
    are far too large to enumerate)."""

    def __init__(self, validator):
        self._validator = validator

    def contains(self, value: bytes) -> bool:
        if value == BOT:
            return True
        try:
            self._validator(value)
            return True
        except EncodingError:
            return False


def tolerated_faults(n: int) -> int:
    return (n - 1) // 3


class ConsensusInstance:
    def __init__(self, instance_id: int, participants, domain):
        self.instance_id = instance_id
        self.participants = tuple(sorted(participants))
        if len(set(self.participants)) != len(self.participants):
            raise ConsensusUsageError("duplicate participants")
        self.domain = domain
        self.inputs: dict[PartyId, bytes] = {}

    def propose(self, miner: PartyId, value: bytes):
        if miner not in self.participants:
            raise ConsensusUsageError(f"{miner} is not a participant")
        if not self.domain.contains(value):
            raise ConsensusUsageError(f"proposed value outside the domain")
        if miner in self.inputs and self.inputs[miner] != value:
            raise ConsensusUsageError(f"{miner} already proposed a different value")
        self.inputs[miner] = value

    @property
    def n(self) -> int:
        return len(self.participants)


@dataclass(frozen=True)
class FaultModel:
    byzantine: frozenset = frozenset()
    scripts: dict = field(default_factory=dict)

    def script_for(self, miner: PartyId):
        return self.scripts.get(miner)


# Byzantine script factories. A script is called once per (phase, round,
# recipient) and returns None (stay silent), ("garbage",) or ("value", v).


def silent_script():
    return lambda phase, round_, recipient: None


def garbage_script(rng):
    return lambda phase, round_, recipient: ("garbage",)


def equivocating_script(rng, candidates):
    pool = [bytes(c) for c in candidates] + [BOT]

    def script(phase, round_, recipient):
        roll = rng.random()
        if roll < 0.15:
            return None
        if roll < 0.3:
            return ("garbage",)
        return ("value", pool[int(rng.integers(0, len(pool)))])

    return script


MINER_SCRIPT_NAMES = ("silent", "garbage", "equivocate")


def resolve_script(spec, rng, candidates):
    """Turn a config-level script name into a script; callables pass
    through so library users can inject anything."""
    if callable(spec):
        return spec
    if spec == "silent":
        return silent_script()
    if spec == "garbage":
        return garbage_script(rng)
    if spec == "equivocate":
        return equivocating_script(rng, candidates)
    raise ConsensusUsageError(f"unknown miner script {spec!r}")


class PhaseKingParty:
    """Honest party state machine; one phase = r1/r2/r3 feed cycle.

    Received value lists are positional over all n participants; the
    caller maps missing/garbage/out-of-domain entries to BOT before
    feeding them in (round 2 may carry the UNDECIDED marker instead).
    """

    def __init__(self, n: int, f_tol: int, pref: bytes):
        self.n = n
        self.f_tol = f_tol
        self.pref = pref
        self._d = BOT
        self._d_count = 0

    # round 1
    def r1_payload(self) -> bytes:
        return self.pref

    def r1_receive(self, values: list[bytes]):
        counts: dict[bytes, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        threshold = self.n - self.f_tol
        for value, count in counts.items():
            if count >= threshold:
                self.pref = value
                return
        self.pref = _UNDECIDED

    # round 2
    def r2_payload(self) -> bytes | None:
        return None if self.pref is _UNDECIDED else self.pref

    def r2_receive(self, values: list):
        counts: dict[bytes, int] = {}
        for v in values:
            if v is _UNDECIDED:
                continue
            counts[v] = counts.get(v, 0) + 1
        if counts:
            best = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
            # ties resolve to the lexicographically smallest encoding
            top = best[1]
            self._d = min(v for v, c in counts.items() if c == top)
            self._d_count = top
        else:
            self._d, self._d_count = BOT, 0

    # round 3
    def r3_payload(self) -> bytes:
        return self._d

    def r3_receive(self, king_value: bytes):
        if self._d_count >= self.n - self.f_tol:
            self.pref = self._d
        else:
            self.pref = king_value

    @staticmethod
    def undecided_marker():
        return _UNDECIDED


@dataclass
class ConsensusResult:
    decisions: dict  # every participant; None for Byzantine miners
    honest: tuple
    f_tolerance: int
    f_actual: int
    guarantees_void: bool
    phases_run: int
    decision_phase: int
    transcript: list

    @property
    def honest_decisions(self) -> dict:
        return {m: self.decisions[m] for m in self.honest}


def run_consensus(instance: ConsensusInstance, fault_model: FaultModel,
                  network: Network, log: EventLog | None = None) -> ConsensusResult:
    """Drive one instance over the network, synchronous-round style."""
    participants = instance.participants
    n = instance.n
    byz = frozenset(fault_model.byzantine) & set(participants)
    honest = tuple(m for m in participants if m not in byz)
    for m in honest:
        if m not in instance.inputs:
            raise ConsensusUsageError(f"honest miner {m} never proposed an input")
    f_tol = tolerated_faults(n)
    f_actual = len(byz)
    guarantees_void = 3 * f_actual >= n
    phases = f_tol + 1

    states = {m: PhaseKingParty(n, f_tol, instance.inputs[m]) for m in honest}
    index_of = {m: i for i, m in enumerate(participants)}
    undecided = PhaseKingParty.undecided_marker()
    transcript: list[dict] = []
    detail = log.detail if log is not None else False
    prefs_history: list[dict] = []

    def exchange(phase: int, round_: int, payload_of, senders) -> dict:
        """Send round messages from `senders`, deliver all, and return
        received[recipient][sender_index] = bytes | UNDECIDED (missing
        entries simply stay absent and count as BOT)."""
        received: dict[PartyId, dict[int, object]] = {m: {} for m in honest}
        for sender in senders:
            if sender in byz:
                script = fault_model.script_for(sender) or silent_script()
                for recipient in participants:
                    if recipient == sender:
                        continue
                    action = script(phase, round_, recipient)
                    if action is None:
                        continue
                    if action[0] == "garbage":
                        payload = b"\xee_not_a_protocol_message"
                    else:
                        payload = encode_consensus(instance.instance_id, phase,
                                                   round_, action[1])
                    network.send_authenticated(sender, recipient, payload)
            else:
                value = payload_of(sender)
                if value is None or value is undecided:
                    value = None
                payload = encode_consensus(instance.instance_id, phase, round_, value)
                if detail:
                    transcript.append({
                        "phase": phase, "round": round_, "sender": str(sender),
                        "value": None if value is None else value.hex(),
                    })
                for recipient in participants:
                    if recipient == sender:
                        continue
                    network.send_authenticated(sender, recipient, payload)

        decoded_cache: dict[bytes, object] = {}

        def on_delivery(delivery):
            recipient = delivery.receiver
            if recipient not in received:
                return  # byzantine recipients run no honest logic
            msg = decoded_cache.get(delivery.payload)
            if msg is None:
                try:
                    msg = decode_payload(delivery.payload)
                except EncodingError:
                    msg = {"kind": "garbage"}
                decoded_cache[delivery.payload] = msg
            if msg["kind"] == "garbage":
                received[recipient][index_of[delivery.sender]] = BOT
                return
            if (msg.get("kind") != "consensus"
                    or msg["instance"] != instance.instance_id
                    or msg["phase"] != phase or msg["round"] != round_):
                received[recipient][index_of[delivery.sender]] = BOT
                return
            if msg["undecided"]:
                value = undecided if round_ == 2 else BOT
            else:
                value = msg["value"]
                if not instance.domain.contains(value):
                    value = BOT
            received[recipient][index_of[delivery.sender]] = value

        network.drain(on_delivery)
        return received

    def aligned(received_for: dict[int, object], me: PartyId, own) -> list:
        values = []
        for i, sender in enumerate(participants):
            if sender == me:
                values.append(own)
            else:
                values.append(received_for.get(i, BOT))
        return values

    for phase in range(1, phases + 1):
        king = participants[(phase - 1) % n]

        r1 = exchange(phase, 1, lambda m: states[m].r1_payload(), participants)
        for m in honest:
            states[m].r1_receive(aligned(r1[m], m, states[m].r1_payload()))

        r2 = exchange(phase, 2, lambda m: states[m].r2_payload(), participants)
        for m in honest:
            own = states[m].r2_payload()
            states[m].r2_receive(aligned(r2[m], m, undecided if own is None else own))

        r3 = exchange(phase, 3, lambda m: states[m].r3_payload(), [king])
        for m in honest:
            if m == king:
                king_value = states[m].r3_payload()
            else:
                king_value = r3[m].get(index_of[king], BOT)
                if king_value is undecided:
                    king_value = BOT
            states[m].r3_receive(king_value)

        prefs_history.append({m: states[m].pref for m in honest})
        if log is not None:
            log.append("consensus_phase", instance=instance.instance_id,
                       phase=phase, king=str(king))

    decisions = {m: (states[m].pref if m in states else None) for m in participants}

    decision_phase = phases
    if honest:
        final = {m: decisions[m] for m in honest}
        for phase_index in range(phases - 1, -1, -1):
            if prefs_history[phase_index] != final:
                break
            decision_phase = phase_index + 1

    return ConsensusResult(
        decisions=decisions,
        honest=honest,
        f_tolerance=f_tol,
        f_actual=f_actual,
        guarantees_void=guarantees_void,
        phases_run=phases,
        decision_phase=decision_phase,
        transcript=transcript,
    )

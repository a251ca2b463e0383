"""Protocol-level commit/open sessions.

The registry is the in-model stand-in for the quantum exchange between
one committer and one receiver: it holds the committed value privately,
answers the receiver's view with nothing beyond the session id and bit
length, and adjudicates openings. Two backends:

* ideal - perfectly concealing and perfectly binding: any opening that
  differs from the committed value is rejected outright;
* cheat-sensitive - bit flips escape detection independently with
  probability (1 - p) each, so an opening with k flipped bits succeeds
  with probability (1 - p)^k and is otherwise caught.

Detection events are logged for the rest of the protocol (miners act on
them), and a record never reaches both Opened and CheatDetected.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .bits import BitString
from .errors import CommitmentStateError, QbsimError
from .eventlog import EventLog
from .parties import PartyId


@dataclass(frozen=True)
class IdealBackend:
    def __str__(self) -> str:
        return "ideal"


@dataclass(frozen=True)
class CheatSensitiveBackend:
    detection_prob_per_bit: float

    def __post_init__(self):
        if not 0.0 < self.detection_prob_per_bit <= 1.0:
            raise QbsimError(
                f"per-bit detection probability must be in (0, 1], got {self.detection_prob_per_bit}"
            )

    def __str__(self) -> str:
        return f"cheat:{self.detection_prob_per_bit:g}"


Backend = IdealBackend | CheatSensitiveBackend


def parse_backend(text: str) -> Backend:
    if text == "ideal":
        return IdealBackend()
    if text.startswith("cheat:"):
        return CheatSensitiveBackend(float(text.split(":", 1)[1]))
    raise QbsimError(f"unknown backend {text!r} (expected 'ideal' or 'cheat:<p>')")


class CommitmentStatus(Enum):
    COMMITTED = "committed"
    OPENED = "opened"
    CHEAT_DETECTED = "cheat_detected"


REJECT_EQUIVOCATION = "equivocation"
REJECT_UNKNOWN = "unknown_commitment"
REJECT_WRONG_PARTY = "wrong_party"


@dataclass(frozen=True)
class OpenResult:
    accepted: bool
    value: BitString | None = None
    reason: str | None = None

    @classmethod
    def accept(cls, value: BitString) -> "OpenResult":
        return cls(True, value=value)

    @classmethod
    def reject(cls, reason: str) -> "OpenResult":
        return cls(False, reason=reason)


class _Record:
    __slots__ = ("id", "committer", "receiver", "value", "status", "backend")

    def __init__(self, id_, committer, receiver, value, backend):
        self.id = id_
        self.committer = committer
        self.receiver = receiver
        self.value = value
        self.status = CommitmentStatus.COMMITTED
        self.backend = backend


class CommitmentRegistry:
    """All commitment sessions of one scenario instance."""

    def __init__(self, rng, log: EventLog):
        self._rng = rng
        self._log = log
        self._records: dict[int, _Record] = {}
        self._next_id = 0

    # ------------------------------------------------------------ commit

    def commit(self, committer: PartyId, receiver: PartyId, value: BitString,
               backend: Backend) -> int:
        if len(value) < 1:
            raise QbsimError("cannot commit a zero-length value")
        record = _Record(self._next_id, committer, receiver, value, backend)
        self._next_id += 1
        self._records[record.id] = record
        if self._log.detail:
            self._log.append("commit", id=record.id, committer=str(committer),
                             receiver=str(receiver), backend=str(backend),
                             length=len(value))
        else:
            self._log.note("commit")
        return record.id

    def receiver_view(self, commitment_id: int, caller: PartyId) -> dict:
        """Everything the receiver can see before opening: id and length."""
        record = self._records.get(commitment_id)
        if record is None or caller != record.receiver:
            raise QbsimError(f"party {caller} holds no commitment {commitment_id}")
        return {"id": record.id, "length": len(record.value)}

    # -------------------------------------------------------------- open

    def open(self, commitment_id: int, caller: PartyId, claimed: BitString) -> OpenResult:
        return self._adjudicate(commitment_id, caller, claimed, declared_equivocation=False)

    def equivocate_attempt(self, commitment_id: int, caller: PartyId,
                           new_value: BitString) -> OpenResult:
        """Same semantics as open; exists so adversary scripts are explicit
        in scenario logs."""
        return self._adjudicate(commitment_id, caller, new_value, declared_equivocation=True)

    def _adjudicate(self, commitment_id, caller, claimed, declared_equivocation) -> OpenResult:
        record = self._records.get(commitment_id)
        if record is None:
            return OpenResult.reject(REJECT_UNKNOWN)
        if caller != record.committer:
            return OpenResult.reject(REJECT_WRONG_PARTY)
        if record.status is not CommitmentStatus.COMMITTED:
            raise CommitmentStateError(
                f"commitment {commitment_id} already {record.status.value}"
            )

        flipped = (
            record.value.hamming_distance(claimed)
            if len(claimed) == len(record.value)
            else max(len(claimed), len(record.value))  # length change: every bit suspect
        )
        if flipped == 0:
            return self._finish(record, OpenResult.accept(record.value), declared_equivocation)

        if isinstance(record.backend, IdealBackend):
            return self._finish(record, OpenResult.reject(REJECT_EQUIVOCATION),
                                declared_equivocation)

        p = record.backend.detection_prob_per_bit
        detected = bool((self._rng.random(flipped) < p).any())
        if detected:
            return self._finish(record, OpenResult.reject(REJECT_EQUIVOCATION),
                                declared_equivocation)
        # cheat slipped through: the receiver accepts the claimed value
        return self._finish(record, OpenResult.accept(claimed), declared_equivocation)

    def _finish(self, record: _Record, result: OpenResult, declared: bool) -> OpenResult:
        if result.accepted:
            record.status = CommitmentStatus.OPENED
            if self._log.detail:
                self._log.append("open", id=record.id, committer=str(record.committer),
                                 receiver=str(record.receiver), result="accepted",
                                 declared_equivocation=declared)
            else:
                self._log.note("open")
        else:
            record.status = CommitmentStatus.CHEAT_DETECTED
            if self._log.detail:
                self._log.append("cheat_detected", id=record.id,
                                 committer=str(record.committer),
                                 receiver=str(record.receiver), reason=result.reason,
                                 declared_equivocation=declared)
            else:
                self._log.note("cheat_detected")
        return result

    # ------------------------------------------------------------ status

    def status(self, commitment_id: int) -> CommitmentStatus:
        return self._records[commitment_id].status

    def parties(self, commitment_id: int) -> tuple[PartyId, PartyId]:
        record = self._records[commitment_id]
        return record.committer, record.receiver

    def cheat_detected_committers(self) -> set[PartyId]:
        """Committers with at least one detected equivocation; the event
        log carries the same information for miners to act on."""
        return {
            r.committer
            for r in self._records.values()
            if r.status is CommitmentStatus.CHEAT_DETECTED
        }

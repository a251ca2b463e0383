"""Shared per-run machinery: parties, network, commitment registry, log."""

from __future__ import annotations

from dataclasses import dataclass

from .commitment import CommitmentRegistry
from .eventlog import EventLog
from .keystore import KeyStore
from .parties import PartyId
from .rng import derive_seed, generator
from .transport import Network


@dataclass
class SimContext:
    seed: int
    parties: tuple[PartyId, ...]
    log: EventLog
    network: Network
    registry: CommitmentRegistry

    def rng(self, *path):
        """Substream keyed by purpose path; independent of other draws."""
        return generator(self.seed, *path)


def make_context(seed: int, parties, key_budget: int, detail: bool) -> SimContext:
    parties = tuple(parties)
    log = EventLog(detail=detail)
    network = Network(parties, KeyStore(seed, budget=key_budget),
                      scheduler_seed=derive_seed(seed, "scheduler"), log=log)
    registry = CommitmentRegistry(generator(seed, "registry"), log)
    return SimContext(seed=seed, parties=parties, log=log, network=network,
                      registry=registry)

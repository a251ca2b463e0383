"""One-time message authentication: Wegman-Carter polynomial hashing.

Each message consumes one fresh key block holding two field elements
(r, s); the tag is Horner evaluation of the payload's chunks at r, plus
the one-time mask s. Every chunk carries a constant high bit and the
byte length is appended as a final chunk, which makes the padded chunk
sequence injective in the payload; two distinct payloads therefore
collide for at most (chunks + 2) values of r, giving a forgery bound of
(chunks + 2) / p per attempt against an adversary without the key.

The 64-bit halves of a key block are reduced mod p, which skews
per-element probabilities by at most 9/8 for the default field; at the
simulator's scale this is a documented constant-factor slack on the
bound, not a structural weakness.
"""

from __future__ import annotations

from dataclasses import dataclass

# Default field: Mersenne prime 2^61 - 1 (tags serialize in 8 bytes).
DEFAULT_PRIME = (1 << 61) - 1
# Small fields for the soundness stress tests.
PRIME_16 = 65521
PRIME_32 = 4294967291


@dataclass(frozen=True)
class PolyMac:
    """Polynomial-evaluation one-time MAC over GF(prime).

    truncate_bits, when set, reduces tags mod 2^truncate_bits; the
    forgery bound degrades by the truncation factor ceil(p / 2^bits).
    """

    prime: int = DEFAULT_PRIME
    truncate_bits: int | None = None

    @property
    def chunk_bits(self) -> int:
        # High-bit head-room: chunk + 2^chunk_bits stays below the prime.
        return self.prime.bit_length() - 2

    @property
    def tag_bytes(self) -> int:
        bits = self.truncate_bits if self.truncate_bits else self.prime.bit_length()
        return (bits + 7) // 8

    def key_from_block(self, block: bytes) -> tuple[int, int]:
        half = len(block) // 2
        r = int.from_bytes(block[:half], "big") % self.prime
        s = int.from_bytes(block[half:], "big") % self.prime
        return r, s

    def hash_payload(self, r: int, payload: bytes) -> int:
        p = self.prime
        cb = self.chunk_bits
        high = 1 << cb
        mask = high - 1
        nbits = len(payload) * 8
        nchunks = -(-nbits // cb) if nbits else 0
        padded = int.from_bytes(payload, "big") << (nchunks * cb - nbits) if nbits else 0
        acc = 0
        for i in range(nchunks - 1, -1, -1):
            acc = (acc * r + ((padded >> (i * cb)) & mask) + high) % p
        return (acc * r + len(payload)) % p

    def tag(self, key: tuple[int, int], payload: bytes) -> int:
        r, s = key
        value = (self.hash_payload(r, payload) + s) % self.prime
        if self.truncate_bits is not None:
            value &= (1 << self.truncate_bits) - 1
        return value

    def verify(self, key: tuple[int, int], payload: bytes, tag: int) -> bool:
        return self.tag(key, payload) == tag

"""Keyed counter-based pseudorandom function, ``blake2b-prf/v1``.

``prf_words(seed, stream, counter)`` is BLAKE2b with a 16-byte digest, keyed by
the seed as 8 big-endian bytes, personalised with ``fslossy-prf-v1``, over the
message ``stream (8 bytes BE) || counter (8 bytes BE)``.  The digest is read as
two big-endian 64-bit words.  Encoders and decoders derive identical draws from
the header seed, so this definition must never change silently; a new
definition gets a new version tag.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from typing import Sequence as SeqT

PRF_NAME = "blake2b-prf/v1"
_PERSON = b"fslossy-prf-v1"
_MASK64 = (1 << 64) - 1


def _key(seed: int) -> bytes:
    return (seed & _MASK64).to_bytes(8, "big")


def prf_u128(seed: int, stream: int, counter: int) -> int:
    h = hashlib.blake2b(
        (stream & _MASK64).to_bytes(8, "big") + (counter & _MASK64).to_bytes(8, "big"),
        digest_size=16, key=_key(seed), person=_PERSON)
    return int.from_bytes(h.digest(), "big")


def prf_words(seed: int, stream: int, counter: int) -> tuple[int, int]:
    v = prf_u128(seed, stream, counter)
    return v >> 64, v & _MASK64


def prf_u64(seed: int, stream: int, counter: int) -> int:
    return prf_u128(seed, stream, counter) >> 64


def uniform_below(total: int, seed: int, stream: int, counter: int) -> int:
    """Integer in [0, total) from 128 PRF bits by scaling (bias below total / 2**128)."""
    return (prf_u128(seed, stream, counter) * total) >> 128


class PrfStream:
    """A (seed, stream) pair handing out consecutive counters starting at 1."""

    def __init__(self, seed: int, stream: int, start: int = 1) -> None:
        self.seed = seed
        self.stream = stream
        self.counter = start

    def next_u128(self) -> int:
        v = prf_u128(self.seed, self.stream, self.counter)
        self.counter += 1
        return v

    def choice(self, thresholds: SeqT[int]) -> int:
        """Pick index i with probability proportional to the gap below thresholds[i].

        ``thresholds`` are cumulative integer weights ending at the total.
        """
        r = (self.next_u128() * thresholds[-1]) >> 128
        lo, hi = 0, len(thresholds) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if thresholds[mid] > r:
                hi = mid
            else:
                lo = mid + 1
        return lo


def cumulative_weights(probs: SeqT[Fraction | str | float]) -> list[int]:
    """Exact cumulative weights for a probability vector (scaled to a common denominator)."""
    fr = [Fraction(str(p)) if isinstance(p, float) else Fraction(p) for p in probs]
    if any(p < 0 for p in fr):
        raise ValueError("negative probability")
    total = sum(fr)
    if total <= 0:
        raise ValueError("probabilities sum to zero")
    den = 1
    for p in fr:
        den = math.lcm(den, p.denominator)
    out, acc = [], 0
    for p in fr:
        acc += p.numerator * (den // p.denominator)
        out.append(acc)
    return out


"""Non-overlapping l-block empirical distributions and enumerative type-class coding."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence as SeqT

from .bits import BitReader, BitstreamError, BitWriter, ceil_log2
from .core import Sequence, seq_to_index


@dataclass(frozen=True)
class BlockEmpiricalDist:
    ell: int
    beta: int
    counts: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def prob(self, vector_index: int) -> Fraction:
        return Fraction(self.counts.get(vector_index, 0), self.total)

    def count_vector(self) -> tuple[int, ...]:
        return tuple(self.counts.get(v, 0) for v in range(self.beta ** self.ell))


def _super_symbols(symbols: SeqT[int], ell: int, beta: int) -> list[int]:
    if ell < 1 or len(symbols) % ell:
        raise ValueError(f"block length {len(symbols)} is not divisible by ell={ell}")
    return [seq_to_index(symbols[j:j + ell], beta) for j in range(0, len(symbols), ell)]


def empirical_block_dist(xhat_block: Sequence, ell: int) -> BlockEmpiricalDist:
    beta = xhat_block.alphabet.size
    return BlockEmpiricalDist(ell, beta, dict(Counter(_super_symbols(xhat_block.symbols, ell, beta))))


def entropy_of_counts(counts) -> float:
    total = sum(counts)
    if total == 0:
        return 0.0
    return math.log2(total) - sum(n * math.log2(n) for n in counts if n > 1) / total


def empirical_entropy(p: BlockEmpiricalDist) -> float:
    return entropy_of_counts(p.counts.values())


def concentration(counts) -> int:
    """prod n**n: for a fixed total, larger means strictly lower entropy."""
    out = 1
    for n in counts:
        if n > 1:
            out *= n ** n
    return out


def multinomial(counts) -> int:
    out = 1
    acc = 0
    for n in counts:
        acc += n
        out *= math.comb(acc, n)
    return out


def type_class_size(p: BlockEmpiricalDist) -> int:
    return multinomial(p.counts.values())


def rank_in_type(string: SeqT[int], counts: list[int]) -> int:
    """Lexicographic rank of ``string`` among all arrangements of its multiset."""
    counts = list(counts)
    remaining = len(string)
    size = multinomial(counts)
    rank = 0
    for s in string:
        # size = arrangements of the remaining multiset; those starting with v number size*counts[v]/remaining
        for v in range(s):
            if counts[v]:
                rank += size * counts[v] // remaining
        size = size * counts[s] // remaining
        counts[s] -= 1
        remaining -= 1
    return rank


def unrank_in_type(rank: int, counts: list[int]) -> list[int]:
    counts = list(counts)
    remaining = sum(counts)
    size = multinomial(counts)
    if not 0 <= rank < size:
        raise ValueError(f"index {rank} outside type class of size {size}")
    out = []
    for _ in range(remaining):
        for v, n in enumerate(counts):
            if not n:
                continue
            block = size * n // remaining
            if rank < block:
                out.append(v)
                size = block
                counts[v] -= 1
                break
            rank -= block
        remaining -= 1
    return out


def type_index_encode(xhat_block: Sequence, ell: int) -> tuple[tuple[int, ...], int]:
    beta = xhat_block.alphabet.size
    supers = _super_symbols(xhat_block.symbols, ell, beta)
    counts = [0] * beta ** ell
    for v in supers:
        counts[v] += 1
    return tuple(counts), rank_in_type(supers, counts)


def type_index_decode(descriptor: SeqT[int], index: int, ell: int, beta: int) -> tuple[int, ...]:
    if len(descriptor) != beta ** ell:
        raise ValueError("descriptor must have beta^ell counts")
    out: list[int] = []
    for v in unrank_in_type(index, list(descriptor)):
        digits = []
        for _ in range(ell):
            v, d = divmod(v, beta)
            digits.append(d)
        out.extend(reversed(digits))
    return tuple(out)


def count_field_width(k: int, ell: int) -> int:
    return ceil_log2(k // ell + 1)


def type_code_length(counts: SeqT[int], k: int, ell: int) -> int:
    return len(counts) * count_field_width(k, ell) + ceil_log2(multinomial(counts))


def write_type_code(w: BitWriter, symbols: SeqT[int], k: int, ell: int, beta: int) -> None:
    supers = _super_symbols(symbols, ell, beta)
    counts = [0] * beta ** ell
    for v in supers:
        counts[v] += 1
    width = count_field_width(k, ell)
    for n in counts:
        w.write_uint(n, width)
    w.write_uint(rank_in_type(supers, counts), ceil_log2(multinomial(counts)))


def read_type_code(r: BitReader, k: int, ell: int, beta: int) -> tuple[int, ...]:
    width = count_field_width(k, ell)
    counts = [r.read_uint(width) for _ in range(beta ** ell)]
    if sum(counts) != k // ell:
        raise BitstreamError("type descriptor counts do not sum to k/ell")
    size = multinomial(counts)
    index = r.read_uint(ceil_log2(size))
    if index >= size:
        raise BitstreamError("type-class index out of range")
    return type_index_decode(counts, index, ell, beta)

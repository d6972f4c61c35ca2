"""LZ78 incremental parsing and a bit-exact LZ78 codec.

Codec: phrase ``j`` (1-indexed) is a pointer to its longest previously parsed
prefix phrase in ``ceil(log2 j)`` bits (0 is the empty phrase), followed by
the innovation symbol in ``ceil(log2 beta)`` bits.  A final phrase that
repeats an earlier phrase is written as a pointer only; the decoder recognises
it from the block length ``k``, which the container supplies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence as SeqT

import numpy as np

from .bits import BitReader, BitstreamError, BitWriter, Bits, ceil_log2
from .core import DEFAULT_ENUM_LIMIT, Alphabet, EnumerationLimitError, Sequence

LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class LzParse:
    """``phrases`` holds (pointer, innovation); innovation is None for an incomplete last phrase."""

    phrases: tuple[tuple[int, int | None], ...]
    c: int
    incomplete_last: bool

    def phrase_strings(self) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = [()]
        for ptr, sym in self.phrases:
            out.append(out[ptr] + (() if sym is None else (sym,)))
        return out[1:]


def _symbols(x) -> tuple[int, ...]:
    return x.symbols if isinstance(x, Sequence) else tuple(x)


def parse_symbols(symbols: SeqT[int]) -> LzParse:
    trie: dict[tuple[int, int], int] = {}
    phrases: list[tuple[int, int | None]] = []
    node = 0
    for s in symbols:
        child = trie.get((node, s))
        if child is None:
            phrases.append((node, s))
            trie[(node, s)] = len(phrases)
            node = 0
        else:
            node = child
    incomplete = node != 0
    if incomplete:
        phrases.append((node, None))
    return LzParse(tuple(phrases), len(phrases), incomplete)


def incremental_parse(x: Sequence | SeqT[int]) -> LzParse:
    return parse_symbols(_symbols(x))


def phrase_count(symbols: SeqT[int]) -> int:
    trie: dict[tuple[int, int], int] = {}
    node = 0
    for s in symbols:
        child = trie.get((node, s))
        if child is None:
            trie[(node, s)] = len(trie) + 1
            node = 0
        else:
            node = child
    return len(trie) + (node != 0)


def code_length_from_parse(parse: LzParse, beta: int) -> int:
    sym_bits = ceil_log2(beta)
    total = 0
    for j, (_, sym) in enumerate(parse.phrases, start=1):
        total += ceil_log2(j)
        if sym is not None:
            total += sym_bits
    return total


def lz_code_length(x: Sequence | SeqT[int], beta: int | None = None) -> int:
    """Exact length in bits of :func:`lz_encode` output, computed without encoding."""
    if beta is None:
        beta = x.alphabet.size
    return code_length_from_parse(incremental_parse(x), beta)


def write_lz(w: BitWriter, symbols: SeqT[int], beta: int) -> None:
    sym_bits = ceil_log2(beta)
    for j, (ptr, sym) in enumerate(parse_symbols(symbols).phrases, start=1):
        w.write_uint(ptr, ceil_log2(j))
        if sym is not None:
            w.write_uint(sym, sym_bits)


def read_lz(r: BitReader, k: int, beta: int) -> tuple[int, ...]:
    sym_bits = ceil_log2(beta)
    phrases: list[tuple[int, ...]] = [()]
    out: list[int] = []
    while len(out) < k:
        j = len(phrases)
        ptr = r.read_uint(ceil_log2(j))
        if ptr >= j:
            raise BitstreamError(f"LZ pointer {ptr} out of range at phrase {j}")
        prefix = phrases[ptr]
        if len(out) + len(prefix) == k and ptr != 0:
            out.extend(prefix)
            break
        if len(out) + len(prefix) + 1 > k:
            raise BitstreamError("LZ phrase overruns block length")
        sym = r.read_uint(sym_bits)
        if sym >= beta:
            raise BitstreamError(f"LZ innovation {sym} outside alphabet of size {beta}")
        phrase = prefix + (sym,)
        phrases.append(phrase)
        out.extend(phrase)
    return tuple(out)


def lz_encode(x: Sequence | SeqT[int], beta: int | None = None) -> Bits:
    if beta is None:
        beta = x.alphabet.size
    w = BitWriter()
    write_lz(w, _symbols(x), beta)
    return w.getbits()


def lz_decode(bits: Bits, k: int, beta: int | Alphabet) -> Sequence:
    alphabet = beta if isinstance(beta, Alphabet) else Alphabet(beta)
    r = BitReader(bits)
    symbols = read_lz(r, k, alphabet.size)
    if r.remaining:
        raise BitstreamError(f"{r.remaining} trailing bits after LZ payload")
    return Sequence(symbols, alphabet)


@lru_cache(maxsize=None)
def c_max(k: int, beta: int) -> int:
    """Largest LZ78 phrase count over all length-k sequences on beta symbols."""
    if k < 0 or beta < 1:
        raise ValueError("need k >= 0 and beta >= 1")
    remaining = k
    count = 0
    length = 1
    while remaining > 0:
        level = beta ** length
        if remaining >= level * length:
            count += level
            remaining -= level * length
        else:
            full, rest = divmod(remaining, length)
            count += full + (1 if rest else 0)
            remaining = 0
        length += 1
    return count


def k_eps(k: int, beta: int) -> float:
    """Finite-k overhead term: log2 e + c_max*log2(2 beta) + log2(2 beta (k+1))."""
    return LOG2E + c_max(k, beta) * math.log2(2 * beta) + math.log2(2 * beta * (k + 1))


def clogc(c: int) -> float:
    return c * math.log2(c) if c > 1 else 0.0


@dataclass(frozen=True)
class LengthBound:
    raw: float
    main: float
    k_eps: float

    @property
    def decomposed(self) -> float:
        return self.main + self.k_eps


def lz_length_envelope(c: int, k: int, beta: int) -> LengthBound:
    """Upper envelope (c+1)*log2(2*beta*(c+1)) on the LZ78 code length, and its
    relaxation c*log2(c) + k_eps(k, beta)."""
    if not 0 <= c <= c_max(k, beta):
        raise ValueError(f"c={c} outside [0, c_max({k},{beta})]")
    raw = (c + 1) * math.log2(2 * beta * (c + 1))
    return LengthBound(raw=raw, main=clogc(c), k_eps=k_eps(k, beta))


def within_raw_bound(bits: int, c: int, beta: int) -> bool:
    """Exact integer test of ``bits <= (c+1) log2(2 beta (c+1))``."""
    return 1 << bits <= (2 * beta * (c + 1)) ** (c + 1)


@dataclass(frozen=True)
class LzTable:
    """LZ78 code length and phrase count for every block in lexicographic order."""

    k: int
    beta: int
    lengths: np.ndarray
    counts: np.ndarray | None  # absent when loaded from a length-only cache

    def __len__(self) -> int:
        return len(self.lengths)


DEFAULT_TABLE_LIMIT = 1 << 22


def _table_dfs(k: int, beta: int) -> tuple[list[int], list[int]]:
    sym_bits = ceil_log2(beta)
    clog = [ceil_log2(j) for j in range(k + 2)]
    trie: dict[tuple[int, int], int] = {}
    lengths: list[int] = []
    counts: list[int] = []

    def dfs(depth: int, node: int, nphr: int, bits: int) -> None:
        if depth == k:
            if node:
                lengths.append(bits + clog[nphr + 1])
                counts.append(nphr + 1)
            else:
                lengths.append(bits)
                counts.append(nphr)
            return
        d1 = depth + 1
        for a in range(beta):
            key = (node, a)
            child = trie.get(key)
            if child is not None:
                dfs(d1, child, nphr, bits)
            else:
                n1 = nphr + 1
                trie[key] = n1
                dfs(d1, 0, n1, bits + clog[n1] + sym_bits)
                del trie[key]

    dfs(0, 0, 0, 0)
    return lengths, counts


@lru_cache(maxsize=16)
def lz_table(k: int, beta: int, limit: int = DEFAULT_TABLE_LIMIT) -> LzTable:
    if beta ** k > limit:
        raise EnumerationLimitError(f"beta^k = {beta}^{k} exceeds table limit {limit}")
    lengths, counts = _table_dfs(k, beta)
    return LzTable(k, beta, np.asarray(lengths, dtype=np.int64),
                   np.asarray(counts, dtype=np.int64))


def try_lz_table(k: int, beta: int, limit: int = DEFAULT_TABLE_LIMIT) -> LzTable | None:
    if beta ** k > limit:
        return None
    return lz_table(k, beta)


__all__ = [
    "LzParse", "LzTable", "LengthBound", "incremental_parse", "parse_symbols", "phrase_count",
    "lz_encode", "lz_decode", "lz_code_length", "write_lz", "read_lz", "c_max", "k_eps",
    "clogc", "lz_length_envelope", "within_raw_bound", "lz_table", "try_lz_table",
    "DEFAULT_ENUM_LIMIT",
]

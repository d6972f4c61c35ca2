"""Universal distribution U(x) = 2^-LZ(x) / Z_U over all reproduction k-blocks.

Masses are kept as exact dyadic integers: block ``i`` carries weight
``2**(lmax - LZ_i)`` where ``lmax`` is the largest code length, so every
probability is an integer ratio and Kraft-type comparisons are exact.
"""

from __future__ import annotations

import bisect
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import accumulate
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import (DEFAULT_ENUM_LIMIT, Alphabet, Budget, DistortionModel, EnumerationLimitError,
                   FormatError, Sequence, ball_indices, index_to_seq)
from .lz78 import LzTable, lz_code_length, lz_table
from .prf import prf_u128

CACHE_MAGIC = b"FSLZ"
CACHE_VERSION = 1
_CHECK_STREAM = 0x1C4ECC


@dataclass(frozen=True)
class UniversalModel:
    k: int
    beta: int
    table: LzTable
    lmax: int
    cumulative: list[int] = field(repr=False)

    @property
    def total(self) -> int:
        """Sum of all dyadic weights; Z_U = total / 2**lmax."""
        return self.cumulative[-1]

    @property
    def partition(self) -> Fraction:
        return Fraction(self.total, 1 << self.lmax)

    def weight(self, index: int) -> int:
        return 1 << (self.lmax - int(self.table.lengths[index]))

    def prob(self, index: int) -> Fraction:
        return Fraction(self.weight(index), self.total)

    def lz_length(self, index: int) -> int:
        return int(self.table.lengths[index])

    def ball_weight(self, indices: Iterable[int]) -> int:
        lengths = self.table.lengths
        lmax = self.lmax
        return sum(1 << (lmax - int(lengths[i])) for i in indices)

    def sample_index(self, seed: int, stream: int, counter: int) -> int:
        r = (prf_u128(seed, stream, counter) * self.total) >> 128
        return bisect.bisect_right(self.cumulative, r)


def _model_from_table(table: LzTable) -> UniversalModel:
    lmax = int(table.lengths.max())
    weights = [1 << (lmax - int(length)) for length in table.lengths]
    return UniversalModel(table.k, table.beta, table, lmax, list(accumulate(weights)))


@lru_cache(maxsize=8)
def build_universal(k: int, beta: int, limit: int = 1 << 22) -> UniversalModel:
    if beta ** k > limit:
        raise EnumerationLimitError(f"universal model needs beta^k = {beta ** k} > {limit} entries")
    return _model_from_table(lz_table(k, beta, limit))


def _ball(model: UniversalModel, x: Sequence, dist_model: DistortionModel, budget: Budget,
          limit: int) -> list[int]:
    if len(x) != model.k or dist_model.beta != model.beta:
        raise ValueError("block length or reproduction alphabet does not match the model")
    return ball_indices(x.symbols, dist_model, budget.units(dist_model), limit)


def u_ball_mass(model: UniversalModel, x: Sequence, dist_model: DistortionModel, budget: Budget,
                limit: int = DEFAULT_ENUM_LIMIT) -> Fraction:
    return Fraction(model.ball_weight(_ball(model, x, dist_model, budget, limit)), model.total)


def neg_log2_ratio(num: int, den: int) -> float:
    """-log2(num/den) for positive integers of any size."""
    if num <= 0:
        return math.inf
    return math.log2(den) - math.log2(num)


def neg_log_u_ball(model: UniversalModel, x: Sequence, dist_model: DistortionModel,
                   budget: Budget, limit: int = DEFAULT_ENUM_LIMIT) -> float:
    ball = _ball(model, x, dist_model, budget, limit)
    w = model.ball_weight(ball)
    # U has full support, so only an empty ball can have zero mass.
    assert w > 0 or not ball
    return neg_log2_ratio(w, model.total)


def u_sample(model: UniversalModel, seed: int, stream: int, counter: int,
             alphabet: Alphabet | None = None) -> Sequence:
    idx = model.sample_index(seed, stream, counter)
    return Sequence(index_to_seq(idx, model.k, model.beta), alphabet or Alphabet(model.beta))


def save_table(path: str | Path, table: LzTable) -> None:
    if int(table.lengths.max(initial=0)) > 255:
        raise ValueError("code lengths above 255 bits do not fit the cache format")
    header = CACHE_MAGIC + struct.pack(">BII", CACHE_VERSION, table.k, table.beta)
    Path(path).write_bytes(header + table.lengths.astype(np.uint8).tobytes())


def load_table(path: str | Path, checks: int = 64) -> LzTable:
    """Read a cached length table, recomputing ``checks`` PRF-chosen entries."""
    data = Path(path).read_bytes()
    if data[:4] != CACHE_MAGIC:
        raise FormatError("not an LZ length cache")
    version, k, beta = struct.unpack(">BII", data[4:13])
    if version != CACHE_VERSION:
        raise FormatError(f"unsupported cache version {version}")
    body = np.frombuffer(data[13:], dtype=np.uint8)
    if len(body) != beta ** k:
        raise FormatError("cache length does not match beta^k")
    lengths = body.astype(np.int64)
    for c in range(checks):
        i = (prf_u128(k * 1000 + beta, _CHECK_STREAM, c) * len(lengths)) >> 128
        if lz_code_length(index_to_seq(i, k, beta), beta) != lengths[i]:
            raise FormatError(f"cache integrity check failed at entry {i}")
    return LzTable(k, beta, lengths, None)

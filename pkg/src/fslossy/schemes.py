"""Block-wise d-semifaithful coding schemes and their shared container.

A: per block, LZ78-code the ball member of least LZ78 cost (or least phrase count).
B: per block, two-part code (type descriptor + enumerative index) of the ball
   member of least l-block empirical entropy.
C: per block, send the position of the first codeword in a lazily drawn
   codebook (i.i.d. under the universal distribution) that lands in the ball.

See FORMAT.md for the byte layout.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence as SeqT

from .bits import (BitReader, BitstreamError, BitWriter, ceil_log2, elias_delta_decode,
                   elias_delta_encode, elias_delta_length, read_elias_delta, write_elias_delta)
from .core import (DEFAULT_ENUM_LIMIT, Alphabet, Budget, DistortionModel, FormatError,
                   FslossyError, Sequence, ball_indices, distortion_units, index_to_seq)
from .empirical import (concentration, entropy_of_counts, multinomial, read_type_code,
                        type_code_length, write_type_code)
from .lz78 import read_lz, try_lz_table, lz_code_length, phrase_count, write_lz
from .universal import build_universal

__all__ = [
    "ContainerHeader", "EncodeResult", "DecodeResult", "RateReport", "encode", "decode",
    "scheme_a_encode", "scheme_a_decode", "scheme_b_encode", "scheme_b_decode",
    "scheme_c_encode", "scheme_c_decode", "measure_rho", "elias_delta_encode",
    "elias_delta_decode", "elias_delta_length", "DEFAULT_MAX_DRAWS",
]

MAGIC = b"FSLC"
VERSION = 1
DEFAULT_MAX_DRAWS = 1 << 20
_DIST_IDS = {"hamming": 0, "absolute": 1}


@dataclass(frozen=True)
class ContainerHeader:
    scheme: str
    alpha: int
    beta: int
    k: int
    ell: int
    n: int
    D: Fraction
    model: DistortionModel
    seed: int = 0
    labels: str | None = None

    def __post_init__(self):
        if self.scheme not in ("A", "B", "C"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.k < 1 or self.n % self.k:
            raise ValueError(f"n={self.n} must be divisible by k={self.k}")
        if self.scheme == "B" and (self.ell < 1 or self.k % self.ell):
            raise ValueError(f"ell={self.ell} must divide k={self.k}")
        if (self.model.alpha, self.model.beta) != (self.alpha, self.beta):
            raise ValueError("distortion model does not match alphabets")

    @property
    def budget(self) -> Budget:
        return Budget(self.D, self.k)

    def to_bytes(self) -> bytes:
        D = Fraction(self.D)
        out = bytearray(MAGIC)
        out += struct.pack(">BcHHHHIII", VERSION, self.scheme.encode(), self.alpha, self.beta,
                           self.k, self.ell, self.n, D.numerator, D.denominator)
        dist_id = _DIST_IDS.get(self.model.name, 2)
        if dist_id < 2 and self.model != DistortionModel.named(self.model.name, self.alpha, self.beta):
            dist_id = 2
        out += struct.pack(">B", dist_id)
        if dist_id == 2:
            out += struct.pack(">I", self.model.denominator)
            for row in self.model.numerators:
                out += struct.pack(f">{self.beta}I", *row)
        if self.scheme == "C":
            out += struct.pack(">Q", self.seed)
        labels = (self.labels or "").encode("utf-8")
        out += struct.pack(">H", len(labels)) + labels
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> tuple[ContainerHeader, int]:
        """Parse a header; returns it with its length in bytes."""
        try:
            if data[:4] != MAGIC:
                raise FormatError("not a container (bad magic)")
            pos = 4
            version, scheme, alpha, beta, k, ell, n, dnum, dden = struct.unpack_from(
                ">BcHHHHIII", data, pos)
            pos += struct.calcsize(">BcHHHHIII")
            if version != VERSION:
                raise FormatError(f"unsupported container version {version}")
            (dist_id,) = struct.unpack_from(">B", data, pos)
            pos += 1
            if dist_id == 0:
                model = DistortionModel.hamming(alpha, beta)
            elif dist_id == 1:
                model = DistortionModel.absolute(alpha, beta)
            elif dist_id == 2:
                (den,) = struct.unpack_from(">I", data, pos)
                pos += 4
                rows = []
                for _ in range(alpha):
                    rows.append(struct.unpack_from(f">{beta}I", data, pos))
                    pos += 4 * beta
                model = DistortionModel(tuple(rows), den)
            else:
                raise FormatError(f"unknown distortion model id {dist_id}")
            seed = 0
            scheme = scheme.decode()
            if scheme == "C":
                (seed,) = struct.unpack_from(">Q", data, pos)
                pos += 8
            (nlab,) = struct.unpack_from(">H", data, pos)
            pos += 2
            labels = data[pos:pos + nlab].decode("utf-8") if nlab else None
            pos += nlab
            if dden == 0:
                raise FormatError("zero denominator for D")
            header = cls(scheme, alpha, beta, k, ell, n, Fraction(dnum, dden), model, seed, labels)
        except (struct.error, UnicodeDecodeError) as e:
            raise FormatError(f"truncated or corrupt header: {e}") from None
        except ValueError as e:
            if isinstance(e, FormatError):
                raise
            raise FormatError(str(e)) from None
        return header, pos


@dataclass
class EncodeResult:
    data: bytes
    header: ContainerHeader
    header_bits: int
    payload_bits: int
    blocks: list[tuple[int, ...]]
    block_bits: list[int]
    escapes: int = 0
    draws: list[int] = field(default_factory=list)

    @property
    def rho(self) -> float:
        return self.payload_bits / self.header.n if self.header.n else 0.0

    def reproduction(self) -> Sequence:
        return _as_sequence(self.blocks, self.header)


@dataclass
class DecodeResult:
    header: ContainerHeader
    xhat: Sequence
    blocks: list[tuple[int, ...]]
    block_bits: list[int]
    header_bits: int
    payload_bits: int
    escapes: int = 0


def _as_sequence(blocks, header: ContainerHeader) -> Sequence:
    labels = header.labels
    alphabet = Alphabet.from_labels(labels) if labels and len(labels) == header.beta else Alphabet(header.beta)
    return Sequence(tuple(s for b in blocks for s in b), alphabet)


def _labels_for(x: Sequence, model: DistortionModel) -> str | None:
    labels = x.alphabet.labels
    if labels is None or model.beta != model.alpha or any(len(lab) != 1 for lab in labels):
        return None
    return "".join(labels)


def _ball(block, model: DistortionModel, units: int, limit: int) -> list[int]:
    ball = ball_indices(block, model, units, limit)
    if not ball:
        raise FslossyError("empty distortion ball: no reproduction block satisfies d <= kD")
    return ball


def choose_a(block, model: DistortionModel, units: int, objective: str = "exact_lz",
             limit: int = DEFAULT_ENUM_LIMIT) -> tuple[int, ...]:
    if objective not in ("exact_lz", "clogc"):
        raise ValueError(f"unknown objective {objective!r}")
    k, beta = len(block), model.beta
    ball = _ball(block, model, units, limit)
    table = try_lz_table(k, beta)
    if table is not None:
        column = table.lengths if objective == "exact_lz" else table.counts
        cost = lambda i: int(column[i])  # noqa: E731
    elif objective == "exact_lz":
        cost = lambda i: lz_code_length(index_to_seq(i, k, beta), beta)  # noqa: E731
    else:
        cost = lambda i: phrase_count(index_to_seq(i, k, beta))  # noqa: E731
    best = min(ball, key=cost)  # min keeps the first (lexicographically smallest) on ties
    return index_to_seq(best, k, beta)


def _super_counts(idx: int, k: int, ell: int, beta: int) -> list[int]:
    base = beta ** ell
    counts: dict[int, int] = {}
    for _ in range(k // ell):
        idx, v = divmod(idx, base)
        counts[v] = counts.get(v, 0) + 1
    return list(counts.values())


def choose_b(block, model: DistortionModel, units: int, ell: int,
             limit: int = DEFAULT_ENUM_LIMIT) -> tuple[int, ...]:
    """Least empirical entropy, then smaller type class, then lexicographic."""
    k, beta = len(block), model.beta
    best_key = None
    best = -1
    for idx in _ball(block, model, units, limit):
        counts = _super_counts(idx, k, ell, beta)
        conc = concentration(counts)
        if best_key is not None and conc < best_key[0]:
            continue
        key = (conc, -multinomial(counts))
        if best_key is None or key > best_key:
            best_key, best = key, idx
    return index_to_seq(best, k, beta)


def _write_c_block(w: BitWriter, block, model: DistortionModel, units: int, u, seed: int,
                   stream: int, max_draws: int, limit: int) -> tuple[tuple[int, ...], bool, int]:
    k, beta = len(block), model.beta
    ball = _ball(block, model, units, limit)
    members = set(ball)
    sample = u.sample_index
    for j in range(1, max_draws + 1):
        idx = sample(seed, stream, j)
        if idx in members:
            w.write_bit(0)
            write_elias_delta(w, j)
            return index_to_seq(idx, k, beta), False, j
    w.write_bit(1)
    first = ball[0]
    w.write_uint(first, k * ceil_log2(beta))
    return index_to_seq(first, k, beta), True, max_draws


def encode(x: Sequence, scheme: str, k: int, model: DistortionModel, D, *, ell: int = 0,
           seed: int = 0, max_draws: int = DEFAULT_MAX_DRAWS, objective: str = "exact_lz",
           limit: int = DEFAULT_ENUM_LIMIT) -> EncodeResult:
    scheme = scheme.upper()
    if x.alphabet.size != model.alpha:
        raise ValueError("source alphabet does not match distortion model")
    header = ContainerHeader(scheme, model.alpha, model.beta, k, ell if scheme == "B" else 0,
                             len(x), Fraction(D), model, seed if scheme == "C" else 0,
                             _labels_for(x, model))
    head = header.to_bytes()
    units = header.budget.units(model)
    beta = model.beta
    u = build_universal(k, beta) if scheme == "C" else None
    w = BitWriter()
    blocks, block_bits, draws = [], [], []
    escapes = 0
    cache: dict = {}
    for i in range(len(x) // k):
        blk = x.symbols[i * k:(i + 1) * k]
        start = len(w)
        if scheme == "A":
            choice = cache.get(blk)
            if choice is None:
                choice = cache[blk] = choose_a(blk, model, units, objective, limit)
            write_lz(w, choice, beta)
        elif scheme == "B":
            choice = cache.get(blk)
            if choice is None:
                choice = cache[blk] = choose_b(blk, model, units, ell, limit)
            write_type_code(w, choice, k, ell, beta)
        else:
            choice, escaped, j = _write_c_block(w, blk, model, units, u, seed, i, max_draws, limit)
            escapes += escaped
            draws.append(j)
        blocks.append(choice)
        block_bits.append(len(w) - start)
    return EncodeResult(head + w.getvalue(), header, 8 * len(head), len(w), blocks, block_bits,
                        escapes, draws)


def decode(data: bytes) -> DecodeResult:
    header, hlen = ContainerHeader.from_bytes(data)
    k, beta, ell = header.k, header.beta, header.ell
    r = BitReader(data[hlen:])
    u = build_universal(k, beta) if header.scheme == "C" else None
    blocks, block_bits = [], []
    escapes = 0
    try:
        for i in range(header.n // k):
            start = r.pos
            if header.scheme == "A":
                blk = read_lz(r, k, beta)
            elif header.scheme == "B":
                blk = read_type_code(r, k, ell, beta)
            elif r.read_bit() == 0:
                blk = index_to_seq(u.sample_index(header.seed, i, read_elias_delta(r)), k, beta)
            else:
                escapes += 1
                idx = r.read_uint(k * ceil_log2(beta))
                if idx >= beta ** k:
                    raise BitstreamError("raw block index out of range")
                blk = index_to_seq(idx, k, beta)
            blocks.append(blk)
            block_bits.append(r.pos - start)
    except BitstreamError as e:
        raise FormatError(f"corrupt payload: {e}") from None
    if r.remaining >= 8 or any(r.read_bit() for _ in range(r.remaining)):
        raise FormatError("unexpected trailing payload bits")
    return DecodeResult(header, _as_sequence(blocks, header), blocks, block_bits, 8 * hlen,
                        sum(block_bits), escapes)


def scheme_a_encode(x: Sequence, k: int, model: DistortionModel, D,
                    objective: str = "exact_lz", **kw) -> EncodeResult:
    return encode(x, "A", k, model, D, objective=objective, **kw)


def scheme_b_encode(x: Sequence, k: int, ell: int, model: DistortionModel, D, **kw) -> EncodeResult:
    return encode(x, "B", k, model, D, ell=ell, **kw)


def scheme_c_encode(x: Sequence, k: int, model: DistortionModel, D, seed: int,
                    max_draws: int = DEFAULT_MAX_DRAWS, **kw) -> EncodeResult:
    return encode(x, "C", k, model, D, seed=seed, max_draws=max_draws, **kw)


def _decode_expect(data: bytes, scheme: str) -> DecodeResult:
    res = decode(data)
    if res.header.scheme != scheme:
        raise FormatError(f"container holds scheme {res.header.scheme}, expected {scheme}")
    return res


def scheme_a_decode(data: bytes) -> DecodeResult:
    return _decode_expect(data, "A")


def scheme_b_decode(data: bytes) -> DecodeResult:
    return _decode_expect(data, "B")


def scheme_c_decode(data: bytes) -> DecodeResult:
    return _decode_expect(data, "C")


def scheme_b_envelope(entropy: float, k: int, ell: int, beta: int) -> float:
    """(k/ell) H + beta^ell * ceil(log2(k/ell + 1))."""
    return k // ell * entropy + beta ** ell * ceil_log2(k // ell + 1)


@dataclass
class RateReport:
    total_bits: int
    rho: float
    block_bits: list[int]
    block_distortions: list[Fraction] | None
    header_bits: int
    escapes: int = 0

    def semifaithful(self, budget: Fraction) -> bool:
        if self.block_distortions is None:
            raise ValueError("distortions need the source sequence")
        return all(d <= budget for d in self.block_distortions)


def measure_rho(data: bytes, source: Sequence | None = None,
                include_header: bool = False) -> RateReport:
    """Rate of a container in bits per source symbol; header bits are excluded unless asked."""
    res = decode(data)
    h = res.header
    total = res.payload_bits + (res.header_bits if include_header else 0)
    dists = None
    if source is not None:
        if len(source) != h.n:
            raise ValueError("source length does not match container")
        dists = [Fraction(distortion_units(source.symbols[i * h.k:(i + 1) * h.k], blk, h.model),
                          h.model.denominator)
                 for i, blk in enumerate(res.blocks)]
    return RateReport(total, total / h.n if h.n else 0.0, res.block_bits, dists,
                      res.header_bits, res.escapes)

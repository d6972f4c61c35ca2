"""Bit-addressed buffers.

Bit order is most-significant-bit first within each byte; multi-bit integers
are written big-endian.  The last byte of a serialized buffer is zero-padded.
"""

from __future__ import annotations

from dataclasses import dataclass


class BitstreamError(ValueError):
    """Raised when reading past the end of a buffer or on malformed codes."""


@dataclass(frozen=True)
class Bits:
    """An immutable bit string: ``nbits`` bits packed MSB-first into ``data``."""

    data: bytes
    nbits: int

    def __len__(self) -> int:
        return self.nbits

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.nbits
        if not 0 <= i < self.nbits:
            raise IndexError(i)
        return (self.data[i >> 3] >> (7 - (i & 7))) & 1

    def __iter__(self):
        for i in range(self.nbits):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bits):
            return NotImplemented
        return self.nbits == other.nbits and self.to01() == other.to01()

    def __hash__(self) -> int:
        return hash((self.nbits, self.to01()))

    def to01(self) -> str:
        return "".join("1" if b else "0" for b in self)

    def __add__(self, other: Bits) -> Bits:
        w = BitWriter()
        w.write_bits(self)
        w.write_bits(other)
        return w.getbits()

    @classmethod
    def from01(cls, s: str) -> Bits:
        w = BitWriter()
        for ch in s:
            if ch not in "01":
                raise ValueError(f"not a bit character: {ch!r}")
            w.write_bit(ch == "1")
        return w.getbits()

    @classmethod
    def empty(cls) -> Bits:
        return cls(b"", 0)


class BitWriter:
    def __init__(self) -> None:
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0
        self._nbits = 0

    def __len__(self) -> int:
        return self._nbits

    def write_bit(self, bit: int | bool) -> None:
        self._acc = (self._acc << 1) | (1 if bit else 0)
        self._nacc += 1
        self._nbits += 1
        if self._nacc == 8:
            self._buf.append(self._acc)
            self._acc = 0
            self._nacc = 0

    def write_uint(self, value: int, width: int) -> None:
        if width < 0:
            raise ValueError("negative width")
        if value < 0 or value >> width:
            raise ValueError(f"{value} does not fit in {width} bits")
        # Fast path through the accumulator; chunk so it never grows large.
        while width > 0:
            take = min(width, 32)
            width -= take
            chunk = (value >> width) & ((1 << take) - 1)
            self._acc = (self._acc << take) | chunk
            self._nacc += take
            self._nbits += take
            while self._nacc >= 8:
                self._nacc -= 8
                self._buf.append((self._acc >> self._nacc) & 0xFF)
            self._acc &= (1 << self._nacc) - 1

    def write_bits(self, bits: Bits) -> None:
        full, rem = divmod(bits.nbits, 8)
        if self._nacc == 0:
            self._buf += bits.data[:full]
            self._nbits += 8 * full
        else:
            for byte in bits.data[:full]:
                self.write_uint(byte, 8)
        if rem:
            self.write_uint(bits.data[full] >> (8 - rem), rem)

    def getbits(self) -> Bits:
        data = bytes(self._buf)
        if self._nacc:
            data += bytes([(self._acc << (8 - self._nacc)) & 0xFF])
        return Bits(data, self._nbits)

    def getvalue(self) -> bytes:
        """Serialized bytes, final byte zero-padded."""
        return self.getbits().data


class BitReader:
    def __init__(self, source: Bits | bytes, nbits: int | None = None) -> None:
        if isinstance(source, Bits):
            self._data = source.data
            self._nbits = source.nbits
        else:
            self._data = bytes(source)
            self._nbits = 8 * len(self._data) if nbits is None else nbits
        self.pos = 0

    @property
    def remaining(self) -> int:
        return self._nbits - self.pos

    def read_bit(self) -> int:
        if self.pos >= self._nbits:
            raise BitstreamError("read past end of bitstream")
        i = self.pos
        self.pos += 1
        return (self._data[i >> 3] >> (7 - (i & 7))) & 1

    def read_uint(self, width: int) -> int:
        if width == 0:
            return 0
        if self.pos + width > self._nbits:
            raise BitstreamError("read past end of bitstream")
        start, end = self.pos, self.pos + width
        first, last = start >> 3, (end - 1) >> 3
        chunk = int.from_bytes(self._data[first:last + 1], "big")
        chunk >>= (8 * (last + 1) - end)
        self.pos = end
        return chunk & ((1 << width) - 1)

    def read_bits(self, width: int) -> Bits:
        w = BitWriter()
        while width > 0:
            take = min(width, 64)
            w.write_uint(self.read_uint(take), take)
            width -= take
        return w.getbits()


def ceil_log2(n: int) -> int:
    """Smallest w with 2**w >= n (0 for n <= 1)."""
    return (n - 1).bit_length() if n > 1 else 0


def elias_delta_length(i: int) -> int:
    if i < 1:
        raise ValueError("Elias-delta codes positive integers only")
    n = i.bit_length() - 1
    return n + 2 * (n + 1).bit_length() - 1


def write_elias_delta(w: BitWriter, i: int) -> None:
    if i < 1:
        raise ValueError("Elias-delta codes positive integers only")
    n = i.bit_length() - 1
    length = n + 1
    lbits = length.bit_length()
    w.write_uint(0, lbits - 1)
    w.write_uint(length, lbits)
    w.write_uint(i - (1 << n), n)


def read_elias_delta(r: BitReader) -> int:
    zeros = 0
    while r.read_bit() == 0:
        zeros += 1
        if zeros > 64:
            raise BitstreamError("Elias-delta prefix too long")
    length = (1 << zeros) | r.read_uint(zeros)
    n = length - 1
    return (1 << n) | r.read_uint(n)


def elias_delta_encode(i: int) -> Bits:
    w = BitWriter()
    write_elias_delta(w, i)
    return w.getbits()


def elias_delta_decode(bits: Bits) -> int:
    r = BitReader(bits)
    value = read_elias_delta(r)
    if r.remaining:
        raise BitstreamError("trailing bits after Elias-delta code")
    return value

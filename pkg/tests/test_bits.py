import pytest
from hypothesis import given, strategies as st

from fslossy.bits import (BitReader, BitWriter, Bits, BitstreamError, ceil_log2,
                          elias_delta_decode, elias_delta_encode, elias_delta_length,
                          read_elias_delta, write_elias_delta)


def test_msb_first_packing():
    w = BitWriter()
    w.write_uint(0b101, 3)
    w.write_uint(0b11111, 5)
    w.write_bit(1)
    assert w.getvalue() == bytes([0b10111111, 0b10000000])
    assert len(w) == 9


def test_bits_from01_roundtrip():
    b = Bits.from01("1011001")
    assert b.to01() == "1011001"
    assert len(b) == 7
    assert list(b) == [1, 0, 1, 1, 0, 0, 1]
    assert (b + Bits.from01("01")).to01() == "101100101"
    assert Bits.empty().to01() == ""


def test_reader_past_end():
    r = BitReader(Bits.from01("10"))
    assert r.read_uint(2) == 2
    with pytest.raises(BitstreamError):
        r.read_bit()


@given(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 2 ** 40)), max_size=30))
def test_uint_roundtrip(fields):
    fields = [(w, v % (1 << w) if w else 0) for w, v in fields]
    wr = BitWriter()
    for width, v in fields:
        wr.write_uint(v, width)
    r = BitReader(wr.getbits())
    assert [r.read_uint(width) for width, _ in fields] == [v for _, v in fields]
    assert r.remaining == 0


def test_ceil_log2():
    assert [ceil_log2(n) for n in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]


def test_elias_delta_small_values():
    assert elias_delta_encode(1).to01() == "1"
    assert len(elias_delta_encode(2)) == 4
    assert elias_delta_encode(17).to01() == "001010001"


def test_elias_delta_rejects_zero():
    with pytest.raises(ValueError):
        elias_delta_encode(0)


def test_elias_delta_exhaustive_roundtrip():
    # 1 .. 10^6 through a single stream, checking the length formula as we go
    w = BitWriter()
    top = 10 ** 6
    expected_len = 0
    for i in range(1, top + 1):
        write_elias_delta(w, i)
        n = i.bit_length() - 1
        expected_len += n + 2 * (n + 1).bit_length() - 2 + 1
    assert len(w) == expected_len
    r = BitReader(w.getbits())
    for i in range(1, top + 1):
        assert read_elias_delta(r) == i
    assert r.remaining == 0


@given(st.integers(1, 2 ** 200))
def test_elias_delta_length_formula(i):
    n = i.bit_length() - 1
    bits = elias_delta_encode(i)
    assert len(bits) == elias_delta_length(i) == n + 2 * ((n + 1).bit_length() - 1) + 1
    assert elias_delta_decode(bits) == i

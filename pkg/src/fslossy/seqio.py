"""Sequence files: raw (one byte per symbol after a small header) or text (one label per char)."""

from __future__ import annotations

from pathlib import Path

from .core import Alphabet, FormatError, Sequence

RAW_MAGIC = b"FSQ"
RAW_VERSION = 1


def to_raw(x: Sequence) -> bytes:
    if x.alphabet.size > 256:
        raise ValueError("raw format holds at most 256 symbols")
    return RAW_MAGIC + bytes([RAW_VERSION, x.alphabet.size - 1]) + bytes(x.symbols)


def from_raw(data: bytes) -> Sequence:
    if data[:3] != RAW_MAGIC or len(data) < 5:
        raise FormatError("not a raw sequence file")
    if data[3] != RAW_VERSION:
        raise FormatError(f"unsupported raw sequence version {data[3]}")
    alpha = data[4] + 1
    body = data[5:]
    if body and max(body) >= alpha:
        raise FormatError("symbol outside the declared alphabet")
    return Sequence(tuple(body), Alphabet(alpha))


def load_sequence(path: str | Path, alphabet: Alphabet | str | None = None) -> Sequence:
    """Raw files are recognised by their magic; anything else is read as text."""
    data = Path(path).read_bytes()
    if data.startswith(RAW_MAGIC):
        return from_raw(data)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: neither a raw sequence file nor UTF-8 text") from None
    text = text.rstrip("\r\n")
    try:
        return Sequence.from_text(text, alphabet)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from None


def save_sequence(path: str | Path, x: Sequence, raw: bool = False) -> None:
    if raw:
        Path(path).write_bytes(to_raw(x))
    else:
        Path(path).write_text(x.to_text() + "\n", encoding="utf-8")

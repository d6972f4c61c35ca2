"""Synthetic sources driven by the keyed PRF (no ambient RNG).

iid:      probability vector p, one draw per symbol.
markov:   row-stochastic transition matrix; the first symbol is drawn from
          ``initial`` (uniform when omitted).
periodic: repeat a fixed pattern.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence as SeqT

from .core import Alphabet, Sequence
from .prf import PrfStream, cumulative_weights

# streams are separated per generator so one seed never reuses draws across them
_IID_STREAM = 0x11D
_MARKOV_STREAM = 0x3A4C


def parse_vector(text: str) -> list[Fraction]:
    return [Fraction(t) for t in text.replace(",", " ").split()]


def parse_matrix(text: str) -> list[list[Fraction]]:
    """Rows separated by ';', entries by ',' or spaces."""
    rows = [r for r in text.split(";") if r.strip()]
    return [parse_vector(r) for r in rows]


def iid(probs: SeqT, n: int, seed: int, alphabet: Alphabet | None = None) -> Sequence:
    cum = cumulative_weights(probs)
    alphabet = alphabet or Alphabet(len(cum))
    rng = PrfStream(seed, _IID_STREAM)
    return Sequence(tuple(rng.choice(cum) for _ in range(n)), alphabet)


def markov(matrix: SeqT[SeqT], n: int, seed: int, initial: SeqT | None = None,
           alphabet: Alphabet | None = None) -> Sequence:
    size = len(matrix)
    if any(len(row) != size for row in matrix):
        raise ValueError("transition matrix must be square")
    rows = [cumulative_weights(row) for row in matrix]
    start = cumulative_weights(initial if initial is not None else [1] * size)
    alphabet = alphabet or Alphabet(size)
    rng = PrfStream(seed, _MARKOV_STREAM)
    out = []
    if n:
        s = rng.choice(start)
        out.append(s)
        for _ in range(n - 1):
            s = rng.choice(rows[s])
            out.append(s)
    return Sequence(tuple(out), alphabet)


def periodic(pattern: str | SeqT[int], n: int, alphabet: Alphabet | None = None) -> Sequence:
    if not len(pattern):
        raise ValueError("empty pattern")
    if isinstance(pattern, str):
        base = Sequence.from_text(pattern, alphabet)
        symbols, alphabet = base.symbols, base.alphabet
    else:
        symbols = tuple(pattern)
        alphabet = alphabet or Alphabet(max(symbols) + 1)
    return Sequence(tuple(symbols[i % len(symbols)] for i in range(n)), alphabet)


def generate(name: str, n: int, seed: int = 0, *, p=None, matrix=None, pattern=None,
             alphabet: Alphabet | None = None) -> Sequence:
    if name == "iid":
        return iid(parse_vector(p) if isinstance(p, str) else p, n, seed, alphabet)
    if name == "markov":
        return markov(parse_matrix(matrix) if isinstance(matrix, str) else matrix, n, seed,
                      alphabet=alphabet)
    if name == "periodic":
        return periodic(pattern, n, alphabet)
    raise ValueError(f"unknown generator {name!r}")

"""Alphabets, sequences, exact additive distortion and distortion balls."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence as SeqT

DEFAULT_ENUM_LIMIT = 1 << 26

_LABEL_CHARS = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class FslossyError(Exception):
    """Base class for library errors."""


class FormatError(FslossyError, ValueError):
    """Malformed input file, container or machine description."""


class EnumerationLimitError(FslossyError):
    """An exhaustive enumeration would exceed the configured ceiling.

    Reduce k or D, or raise the limit explicitly.
    """


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("alphabet size must be >= 1")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.size:
                raise ValueError("label count does not match alphabet size")
            if len(set(labels)) != len(labels):
                raise ValueError("alphabet labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def label(self, i: int) -> str:
        if self.labels is not None:
            return self.labels[i]
        if self.size <= len(_LABEL_CHARS):
            return _LABEL_CHARS[i]
        return f"<{i}>"

    @classmethod
    def from_labels(cls, labels) -> Alphabet:
        labels = tuple(labels)
        return cls(len(labels), labels)


@dataclass(frozen=True)
class Sequence:
    symbols: tuple[int, ...]
    alphabet: Alphabet

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        size = self.alphabet.size
        for s in symbols:
            if not 0 <= s < size:
                raise ValueError(f"symbol {s} outside alphabet of size {size}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Sequence(self.symbols[item], self.alphabet)
        return self.symbols[item]

    def blocks(self, k: int) -> list[Sequence]:
        if k < 1 or len(self) % k:
            raise ValueError(f"length {len(self)} is not divisible by k={k}")
        return [self[i:i + k] for i in range(0, len(self), k)]

    def to_text(self) -> str:
        return "".join(self.alphabet.label(s) for s in self.symbols)

    def index(self) -> int:
        """Lexicographic rank among all sequences of this length (first symbol most significant)."""
        return seq_to_index(self.symbols, self.alphabet.size)

    @classmethod
    def from_text(cls, text: str, alphabet: Alphabet | str | None = None) -> Sequence:
        if alphabet is None:
            alphabet = Alphabet.from_labels(sorted(set(text)) or ["0"])
        elif isinstance(alphabet, str):
            alphabet = Alphabet.from_labels(alphabet)
        if alphabet.labels is None:
            lookup = {_LABEL_CHARS[i]: i for i in range(min(alphabet.size, len(_LABEL_CHARS)))}
        else:
            lookup = {lab: i for i, lab in enumerate(alphabet.labels)}
        try:
            return cls(tuple(lookup[ch] for ch in text), alphabet)
        except KeyError as e:
            raise FormatError(f"character {e.args[0]!r} not in alphabet") from None

    @classmethod
    def from_index(cls, index: int, k: int, alphabet: Alphabet) -> Sequence:
        return cls(index_to_seq(index, k, alphabet.size), alphabet)


def seq_to_index(symbols: SeqT[int], beta: int) -> int:
    idx = 0
    for s in symbols:
        idx = idx * beta + s
    return idx


def index_to_seq(index: int, k: int, beta: int) -> tuple[int, ...]:
    out = [0] * k
    for i in range(k - 1, -1, -1):
        index, out[i] = divmod(index, beta)
    return tuple(out)


@dataclass(frozen=True)
class DistortionModel:
    """Single-letter distortion d(x, y) = numerators[x][y] / denominator."""

    numerators: tuple[tuple[int, ...], ...]
    denominator: int = 1
    name: str = "inline"

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.numerators)
        object.__setattr__(self, "numerators", rows)
        if self.denominator < 1:
            raise ValueError("denominator must be a positive integer")
        if not rows or not rows[0]:
            raise ValueError("empty distortion matrix")
        width = len(rows[0])
        for row in rows:
            if len(row) != width:
                raise ValueError("ragged distortion matrix")
            if any(v < 0 for v in row):
                raise ValueError("distortion entries must be nonnegative")

    @property
    def alpha(self) -> int:
        return len(self.numerators)

    @property
    def beta(self) -> int:
        return len(self.numerators[0])

    def d(self, x: int, y: int) -> Fraction:
        return Fraction(self.numerators[x][y], self.denominator)

    @cached_property
    def row_min(self) -> tuple[int, ...]:
        return tuple(min(row) for row in self.numerators)

    @cached_property
    def zero_cost_symbol(self) -> tuple[int, ...]:
        """Per source symbol, the lowest-index reproduction symbol of minimal distortion."""
        return tuple(row.index(min(row)) for row in self.numerators)

    def scaled(self, factor: int) -> DistortionModel:
        return DistortionModel(
            tuple(tuple(v * factor for v in row) for row in self.numerators),
            self.denominator, self.name)

    @classmethod
    def hamming(cls, alpha: int, beta: int | None = None) -> DistortionModel:
        beta = alpha if beta is None else beta
        return cls(tuple(tuple(0 if x == y else 1 for y in range(beta)) for x in range(alpha)),
                   1, "hamming")

    @classmethod
    def absolute(cls, alpha: int, beta: int | None = None) -> DistortionModel:
        beta = alpha if beta is None else beta
        return cls(tuple(tuple(abs(x - y) for y in range(beta)) for x in range(alpha)),
                   1, "absolute")

    @classmethod
    def from_text(cls, text: str) -> DistortionModel:
        tokens = text.split()
        try:
            alpha, beta, denom = (int(t) for t in tokens[:3])
            values = [int(t) for t in tokens[3:]]
        except ValueError as e:
            raise FormatError(f"bad distortion file: {e}") from None
        if len(values) != alpha * beta:
            raise FormatError(f"expected {alpha * beta} numerators, got {len(values)}")
        rows = tuple(tuple(values[i * beta:(i + 1) * beta]) for i in range(alpha))
        try:
            return cls(rows, denom, "file")
        except ValueError as e:
            raise FormatError(str(e)) from None

    def to_text(self) -> str:
        lines = [f"{self.alpha} {self.beta} {self.denominator}"]
        lines += [" ".join(str(v) for v in row) for row in self.numerators]
        return "\n".join(lines) + "\n"

    @classmethod
    def named(cls, spec: str, alpha: int, beta: int | None = None) -> DistortionModel:
        """Resolve ``hamming``, ``absolute`` or ``file=<path>``."""
        if spec == "hamming":
            return cls.hamming(alpha, beta)
        if spec == "absolute":
            return cls.absolute(alpha, beta)
        if spec.startswith("file="):
            return cls.from_text(Path(spec[5:]).read_text())
        raise ValueError(f"unknown distortion model {spec!r}")


@dataclass(frozen=True)
class Budget:
    per_letter: Fraction
    block_len: int
    block_budget: Fraction = field(init=False)

    def __post_init__(self):
        per_letter = Fraction(self.per_letter)
        if per_letter < 0:
            raise ValueError("D must be nonnegative")
        if self.block_len < 1:
            raise ValueError("block length must be positive")
        object.__setattr__(self, "per_letter", per_letter)
        object.__setattr__(self, "block_budget", per_letter * self.block_len)

    def units(self, model: DistortionModel) -> int:
        """kD expressed in the model's numerator units, rounded down.

        Integer distortion sums compare against this exactly.
        """
        b = self.block_budget * model.denominator
        return b.numerator // b.denominator


def parse_fraction(text: str | int | float | Fraction) -> Fraction:
    """Parse ``num/den``, a decimal string, or a number into an exact rational."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        return Fraction(str(text))
    return Fraction(text)


def _check_pair(x: Sequence, y: Sequence, model: DistortionModel) -> None:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if x.alphabet.size != model.alpha or y.alphabet.size != model.beta:
        raise ValueError(
            f"alphabets ({x.alphabet.size}, {y.alphabet.size}) do not match "
            f"model dimensions ({model.alpha}, {model.beta})")


def distortion_units(x: SeqT[int], y: SeqT[int], model: DistortionModel) -> int:
    rows = model.numerators
    return sum(rows[a][b] for a, b in zip(x, y))


def distortion(x: Sequence, y: Sequence, model: DistortionModel) -> Fraction:
    _check_pair(x, y, model)
    return Fraction(distortion_units(x.symbols, y.symbols, model), model.denominator)


def ball_contains(x: Sequence, y: Sequence, model: DistortionModel, budget: Budget) -> bool:
    _check_pair(x, y, model)
    if len(x) != budget.block_len:
        raise ValueError("block length does not match budget")
    return distortion_units(x.symbols, y.symbols, model) <= budget.units(model)


def ball_indices(x: SeqT[int], model: DistortionModel, budget_units: int,
                 limit: int = DEFAULT_ENUM_LIMIT) -> list[int]:
    """Lexicographic indices of every reproduction block within the ball.

    Depth-first over positions; a prefix is dropped once its distortion plus
    the cheapest possible completion of the suffix exceeds the budget.
    ``limit`` caps the number of visited prefixes.
    """
    k = len(x)
    beta = model.beta
    rows = [model.numerators[s] for s in x]
    suffix = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix[i] = suffix[i + 1] + min(rows[i])
    if suffix[0] > budget_units:
        return []
    out: list[int] = []
    visited = 0

    def dfs(pos: int, acc: int, idx: int) -> None:
        nonlocal visited
        if pos == k:
            out.append(idx)
            return
        row = rows[pos]
        slack = budget_units - suffix[pos + 1]
        base = idx * beta
        for y in range(beta):
            cost = acc + row[y]
            if cost <= slack:
                visited += 1
                if visited > limit:
                    raise EnumerationLimitError(
                        f"ball enumeration exceeded {limit} prefixes (k={k})")
                dfs(pos + 1, cost, base + y)

    dfs(0, 0, 0)
    return out


def enumerate_ball(x: Sequence, model: DistortionModel, budget: Budget,
                   limit: int = DEFAULT_ENUM_LIMIT,
                   alphabet: Alphabet | None = None) -> Iterator[Sequence]:
    if x.alphabet.size != model.alpha:
        raise ValueError("source alphabet does not match distortion model")
    if len(x) != budget.block_len:
        raise ValueError("block length does not match budget")
    out_alpha = alphabet or (x.alphabet if model.beta == x.alphabet.size else Alphabet(model.beta))
    k = len(x)
    for idx in ball_indices(x.symbols, model, budget.units(model), limit):
        yield Sequence(index_to_seq(idx, k, model.beta), out_alpha)

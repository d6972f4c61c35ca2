"""Explicit finite-state reproduction encoders (FSRE) and lossless encoders (FSLE).

Machines are dense tables indexed ``[state][symbol]``.  FSRE outputs are tuples
of reproduction symbols (the empty tuple is the idle output); FSLE outputs are
strings over ``"01"``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence as SeqT

from .bits import Bits, ceil_log2
from .core import (DEFAULT_ENUM_LIMIT, Alphabet, Budget, DistortionModel, EnumerationLimitError,
                   FormatError, FslossyError, Sequence, distortion_units, index_to_seq, seq_to_index)
from .lz78 import lz_encode

DEFAULT_STATE_LIMIT = 1 << 20


class MachineError(FslossyError):
    """Invalid machine table, or a run that violates block length conservation."""


def _check_tables(out, nxt, n_states: int, n_symbols: int, what: str) -> None:
    if len(out) != n_states or len(nxt) != n_states:
        raise MachineError(f"{what}: tables must have one row per state ({n_states})")
    for s in range(n_states):
        if len(out[s]) != n_symbols or len(nxt[s]) != n_symbols:
            raise MachineError(f"{what}: row {s} is not total over {n_symbols} symbols")
        for t in nxt[s]:
            if not 0 <= t < n_states:
                raise MachineError(f"{what}: next state {t} out of range")


@dataclass(frozen=True)
class FsreSpec:
    k: int
    alpha: int
    beta: int
    n_states: int
    out: tuple[tuple[tuple[int, ...], ...], ...]
    nxt: tuple[tuple[int, ...], ...]
    initial: int = 0

    def __post_init__(self):
        out = tuple(tuple(tuple(o) for o in row) for row in self.out)
        nxt = tuple(tuple(row) for row in self.nxt)
        object.__setattr__(self, "out", out)
        object.__setattr__(self, "nxt", nxt)
        _check_tables(out, nxt, self.n_states, self.alpha, "FSRE")
        if not 0 <= self.initial < self.n_states:
            raise MachineError("initial state out of range")
        for row in out:
            for o in row:
                if any(not 0 <= y < self.beta for y in o):
                    raise MachineError("FSRE output symbol outside reproduction alphabet")

    def run_block(self, state: int, block: SeqT[int]) -> tuple[tuple[int, ...], int]:
        """Extended output u(s, x^k) and final state v(s, x^k) for one block."""
        produced: list[int] = []
        for x in block:
            produced.extend(self.out[state][x])
            state = self.nxt[state][x]
        return tuple(produced), state


@dataclass(frozen=True)
class FsreRun:
    y: list[tuple[int, ...]]
    xhat: Sequence
    states: list[int]


def fsre_run(m: FsreSpec, x: Sequence, out_alphabet: Alphabet | None = None) -> FsreRun:
    if len(x) % m.k:
        raise ValueError(f"input length {len(x)} not divisible by k={m.k}")
    if x.alphabet.size != m.alpha:
        raise ValueError("input alphabet does not match machine")
    s = m.initial
    states = [s]
    ys: list[tuple[int, ...]] = []
    xhat: list[int] = []
    block_out = 0
    for t, sym in enumerate(x.symbols):
        y = m.out[s][sym]
        ys.append(y)
        xhat.extend(y)
        block_out += len(y)
        s = m.nxt[s][sym]
        states.append(s)
        if (t + 1) % m.k == 0:
            if block_out != m.k:
                raise MachineError(
                    f"block ending at t={t + 1} produced {block_out} symbols, expected {m.k}")
            block_out = 0
    alphabet = out_alphabet or (x.alphabet if m.beta == m.alpha else Alphabet(m.beta))
    return FsreRun(ys, Sequence(tuple(xhat), alphabet), states)


@dataclass(frozen=True)
class FsleSpec:
    q: int
    beta: int
    out: tuple[tuple[str, ...], ...]
    nxt: tuple[tuple[int, ...], ...]
    initial: int = 0

    def __post_init__(self):
        out = tuple(tuple(str(o) for o in row) for row in self.out)
        nxt = tuple(tuple(row) for row in self.nxt)
        object.__setattr__(self, "out", out)
        object.__setattr__(self, "nxt", nxt)
        _check_tables(out, nxt, self.q, self.beta, "FSLE")
        if not 0 <= self.initial < self.q:
            raise MachineError("initial state out of range")
        for row in out:
            for o in row:
                if set(o) - {"0", "1"}:
                    raise MachineError(f"FSLE output {o!r} is not a bit string")

    def output(self, state: int, symbols: SeqT[int]) -> tuple[str, int]:
        bits = []
        for a in symbols:
            bits.append(self.out[state][a])
            state = self.nxt[state][a]
        return "".join(bits), state

    def output_length(self, state: int, symbols: SeqT[int]) -> int:
        total = 0
        for a in symbols:
            total += len(self.out[state][a])
            state = self.nxt[state][a]
        return total


def fsle_run(m: FsleSpec, xhat: Sequence | SeqT[int], state: int | None = None) -> tuple[Bits, int]:
    symbols = xhat.symbols if isinstance(xhat, Sequence) else tuple(xhat)
    bits, final = m.output(m.initial if state is None else state, symbols)
    return Bits.from01(bits), final


@dataclass(frozen=True)
class FsvqSpec:
    """Finite-state vector quantizer on source blocks of length ``k``.

    ``encode[s][block_index]`` is the channel symbol, ``decode[s][u]`` the
    reproduction block and ``nxt[s][u]`` the next state.
    """

    k: int
    alpha: int
    beta: int
    n_states: int
    n_channel: int
    encode: tuple[tuple[int, ...], ...]
    decode: tuple[tuple[tuple[int, ...], ...], ...]
    nxt: tuple[tuple[int, ...], ...]
    initial: int = 0

    def __post_init__(self):
        if len(self.encode) != self.n_states or any(len(r) != self.alpha ** self.k for r in self.encode):
            raise MachineError("FSVQ encode table is not total")
        _check_tables(self.decode, self.nxt, self.n_states, self.n_channel, "FSVQ")
        for row in self.encode:
            if any(not 0 <= u < self.n_channel for u in row):
                raise MachineError("FSVQ channel symbol out of range")
        for row in self.decode:
            if any(len(b) != self.k for b in row):
                raise MachineError("FSVQ reproduction blocks must have length k")


def fsvq_simulate(v: FsvqSpec, x: Sequence) -> tuple[tuple[int, ...], list[int]]:
    """Cascade of the FSVQ encoder and decoder, run directly on blocks."""
    s = v.initial
    states = [s]
    out: list[int] = []
    for blk in x.blocks(v.k):
        u = v.encode[s][seq_to_index(blk.symbols, v.alpha)]
        out.extend(v.decode[s][u])
        s = v.nxt[s][u]
        states.append(s)
    return tuple(out), states


def _prefix_offsets(k: int, alpha: int) -> list[int]:
    offsets = [0]
    for j in range(k):
        offsets.append(offsets[-1] + alpha ** j)
    return offsets


def _block_buffer_fsre(k: int, alpha: int, beta: int, n_outer: int,
                       emit: Callable[[int, tuple[int, ...]], tuple[tuple[int, ...], int]],
                       initial_outer: int = 0, max_states: int = DEFAULT_STATE_LIMIT) -> FsreSpec:
    """FSRE whose state is (outer state, contents of the current partial block).

    It idles for k-1 symbols and then emits ``emit(outer, block)``.
    """
    offsets = _prefix_offsets(k, alpha)
    per_outer = offsets[k]
    n_states = n_outer * per_outer
    if n_states > max_states:
        raise EnumerationLimitError(f"block-buffer FSRE needs {n_states} states > {max_states}")
    out: list[list[tuple[int, ...]]] = []
    nxt: list[list[int]] = []
    for outer in range(n_outer):
        base = outer * per_outer
        for j in range(k):
            for p in range(alpha ** j):
                prefix = index_to_seq(p, j, alpha)
                orow, nrow = [], []
                for a in range(alpha):
                    if j < k - 1:
                        orow.append(())
                        nrow.append(base + offsets[j + 1] + p * alpha + a)
                    else:
                        block, new_outer = emit(outer, prefix + (a,))
                        if len(block) != k:
                            raise MachineError("block mapper must return exactly k symbols")
                        orow.append(tuple(block))
                        nrow.append(new_outer * per_outer)
                out.append(orow)
                nxt.append(nrow)
    return FsreSpec(k, alpha, beta, n_states, tuple(map(tuple, out)), tuple(map(tuple, nxt)),
                    initial_outer * per_outer)


def block_mapper_to_fsre(mapper: Callable[[tuple[int, ...]], SeqT[int]], k: int, alpha: int,
                         beta: int | None = None, max_states: int = DEFAULT_STATE_LIMIT) -> FsreSpec:
    """Block code as an FSRE: the state is the input seen so far in the current block."""
    beta = alpha if beta is None else beta
    return _block_buffer_fsre(k, alpha, beta, 1, lambda _, blk: (tuple(mapper(blk)), 0),
                              max_states=max_states)


def fsvq_to_fsre(v: FsvqSpec, max_states: int = DEFAULT_STATE_LIMIT) -> FsreSpec:
    """Symbol-level FSRE with u(s, x^k) = b(a(x^k, s), s) and v(s, x^k) = phi(a(x^k, s), s)."""
    def emit(s: int, block: tuple[int, ...]):
        u = v.encode[s][seq_to_index(block, v.alpha)]
        return v.decode[s][u], v.nxt[s][u]
    return _block_buffer_fsre(v.k, v.alpha, v.beta, v.n_states, emit, v.initial, max_states)


def fsre_state_of_fsvq(v: FsvqSpec, s: int) -> int:
    """FSRE state corresponding to FSVQ state ``s`` at a block boundary."""
    return s * _prefix_offsets(v.k, v.alpha)[v.k]


def budget_fsre(k: int, model: DistortionModel, D, target: int = 0) -> FsreSpec:
    """Zero-delay FSRE that tracks the remaining distortion budget within each block.

    Each symbol is reproduced as ``target`` when the budget still covers the
    worst-case cost of finishing the block; otherwise as the cheapest symbol.
    """
    budget = Budget(Fraction(D), k)
    total = budget.units(model)
    worst = max(model.row_min)
    if total < k * worst:
        raise MachineError("budget too small for a guaranteed-compliant greedy reproduction")
    width = total + 1
    out, nxt = [], []
    for t in range(k):
        reserve = (k - t - 1) * worst
        for rem in range(width):
            orow, nrow = [], []
            for a in range(model.alpha):
                row = model.numerators[a]
                y = target if row[target] + reserve <= rem else model.zero_cost_symbol[a]
                left = max(rem - row[y], 0)  # negative only in unreachable states
                orow.append((y,))
                nrow.append(((t + 1) % k) * width + (left if t + 1 < k else total))
            out.append(orow)
            nxt.append(nrow)
    return FsreSpec(k, model.alpha, model.beta, k * width, tuple(map(tuple, out)),
                    tuple(map(tuple, nxt)), total)


def identity_fsre(alpha: int, k: int = 1) -> FsreSpec:
    return FsreSpec(k, alpha, alpha, 1, (tuple((a,) for a in range(alpha)),),
                    (tuple(0 for _ in range(alpha)),))


def constant_fsre(alpha: int, beta: int, symbol: int = 0, k: int = 1) -> FsreSpec:
    return FsreSpec(k, alpha, beta, 1, (tuple((symbol,) for _ in range(alpha)),),
                    (tuple(0 for _ in range(alpha)),))


def block_start_states(m: FsreSpec, limit: int = DEFAULT_ENUM_LIMIT) -> list[int]:
    """FSRE states reachable at block boundaries from the initial state."""
    seen = {m.initial}
    frontier = [m.initial]
    work = 0
    while frontier:
        nxt_frontier = []
        for s in frontier:
            for idx in range(m.alpha ** m.k):
                work += 1
                if work > limit:
                    raise EnumerationLimitError("block-start state exploration exceeded limit")
                _, t = m.run_block(s, index_to_seq(idx, m.k, m.alpha))
                if t not in seen:
                    seen.add(t)
                    nxt_frontier.append(t)
        frontier = nxt_frontier
    return sorted(seen)


@dataclass(frozen=True)
class ComplianceVerdict:
    compliant: bool
    checked_blocks: int
    violation: tuple[int, tuple[int, ...], tuple[int, ...]] | None = None
    reason: str = ""


def check_length_conservation(m: FsreSpec, limit: int = DEFAULT_ENUM_LIMIT) -> ComplianceVerdict:
    checked = 0
    for s in block_start_states(m, limit):
        for idx in range(m.alpha ** m.k):
            block = index_to_seq(idx, m.k, m.alpha)
            produced, _ = m.run_block(s, block)
            checked += 1
            if len(produced) != m.k:
                return ComplianceVerdict(False, checked, (s, block, produced),
                                         f"block produced {len(produced)} symbols")
    return ComplianceVerdict(True, checked)


def check_distortion_compliance(m: FsreSpec, model: DistortionModel, budget: Budget,
                                limit: int = DEFAULT_ENUM_LIMIT) -> ComplianceVerdict:
    """Exhaustively verify d(x^k, u(s, x^k)) <= kD from every reachable block-start state."""
    if budget.block_len != m.k:
        raise ValueError("budget block length does not match machine")
    if model.alpha != m.alpha or model.beta != m.beta:
        raise ValueError("distortion model does not match machine alphabets")
    if m.alpha ** m.k > limit:
        raise EnumerationLimitError(f"alpha^k = {m.alpha ** m.k} exceeds limit {limit}")
    units = budget.units(model)
    checked = 0
    for s in block_start_states(m, limit):
        for idx in range(m.alpha ** m.k):
            block = index_to_seq(idx, m.k, m.alpha)
            produced, _ = m.run_block(s, block)
            checked += 1
            if len(produced) != m.k:
                return ComplianceVerdict(False, checked, (s, block, produced),
                                         "length conservation violated")
            if distortion_units(block, produced, model) > units:
                return ComplianceVerdict(False, checked, (s, block, produced),
                                         "distortion exceeds kD")
    return ComplianceVerdict(True, checked)


# --- FSLE constructions -------------------------------------------------------

def raw_fsle(beta: int) -> FsleSpec:
    width = ceil_log2(beta)
    return FsleSpec(1, beta, (tuple(format(a, f"0{width}b") if width else "" for a in range(beta)),),
                    (tuple(0 for _ in range(beta)),))


def all_lambda_fsle(beta: int, q: int = 1) -> FsleSpec:
    return FsleSpec(q, beta, tuple(tuple("" for _ in range(beta)) for _ in range(q)),
                    tuple(tuple((z + 1) % q if q > 1 else 0 for _ in range(beta)) for z in range(q)))


def _buffer_fsle(ell: int, beta: int, emit: Callable[[tuple[int, ...]], str],
                 max_states: int = DEFAULT_STATE_LIMIT) -> FsleSpec:
    offsets = _prefix_offsets(ell, beta)
    q = offsets[ell]
    if q > max_states:
        raise EnumerationLimitError(f"buffering FSLE needs {q} states > {max_states}")
    out, nxt = [], []
    for j in range(ell):
        for p in range(beta ** j):
            prefix = index_to_seq(p, j, beta)
            orow, nrow = [], []
            for a in range(beta):
                if j < ell - 1:
                    orow.append("")
                    nrow.append(offsets[j + 1] + p * beta + a)
                else:
                    orow.append(emit(prefix + (a,)))
                    nrow.append(0)
            out.append(orow)
            nxt.append(nrow)
    return FsleSpec(q, beta, tuple(map(tuple, out)), tuple(map(tuple, nxt)))


def prefix_code_fsle(codebook: SeqT[str], ell: int, beta: int) -> FsleSpec:
    """Buffer ell symbols, then emit ``codebook[index of the ell-vector]``.

    Information lossless when the codebook is prefix-free.
    """
    if len(codebook) != beta ** ell:
        raise ValueError("codebook needs one word per ell-vector")
    return _buffer_fsle(ell, beta, lambda v: codebook[seq_to_index(v, beta)])


def block_lz_fsle(k: int, beta: int, max_states: int = DEFAULT_STATE_LIMIT) -> FsleSpec:
    """Buffer each k-block and emit its LZ78 code at the block end."""
    return _buffer_fsle(k, beta, lambda v: lz_encode(v, beta).to01(), max_states)


# --- information losslessness ---------------------------------------------------

@dataclass(frozen=True)
class ILVerdict:
    """Outcome of the bounded losslessness search.

    ``status`` is ``"violation"`` (``witness`` holds the initial state and two
    distinct inputs with equal output and final state), ``"no_violation"``
    (none up to ``max_len``; ``exhaustive`` means the pair search closed
    entirely, so none exists at any length), or ``"undecided"`` (the search
    budget ran out first).
    """

    status: str
    max_len: int
    exhaustive: bool = False
    witness: tuple[int, tuple[int, ...], tuple[int, ...]] | None = None
    explored: int = 0

    @property
    def lossless(self) -> bool:
        return self.status == "no_violation"


def _reach_paths(m: FsleSpec, start: int) -> dict[int, tuple[int, ...]]:
    paths = {start: ()}
    queue = deque([start])
    while queue:
        z = queue.popleft()
        for a in range(m.beta):
            t = m.nxt[z][a]
            if t not in paths:
                paths[t] = paths[z] + (a,)
                queue.append(t)
    return paths


def _merge(lead: int, left: str, o1: str, o2: str):
    full1 = left + o1 if lead == 0 else o1
    full2 = o2 if lead == 0 else left + o2
    if full1.startswith(full2):
        return 0, full1[len(full2):]
    if full2.startswith(full1):
        return 1, full2[len(full1):]
    return None


def check_information_lossless(m: FsleSpec, max_len: int, initial: int | None = None,
                               budget: int = 1 << 20) -> ILVerdict:
    """Search for two distinct equal-length inputs with identical output and final state.

    Explores pairs of diverging inputs jointly, keeping only the unmatched
    output suffix, in order of input length.  ``initial=None`` checks every
    state as a starting state.
    """
    starts = range(m.q) if initial is None else [initial]
    # config: (z1, z2, lead, leftover); parent: config -> (parent config | origin, sym1, sym2)
    parent: dict = {}
    dist: dict = {}
    buckets: dict[int, list] = {}

    def push(cfg, length, link):
        if length > max_len or dist.get(cfg, max_len + 1) <= length:
            return
        dist[cfg] = length
        parent[cfg] = link
        buckets.setdefault(length, []).append(cfg)

    for z0 in starts:
        for z, path in _reach_paths(m, z0).items():
            for a in range(m.beta):
                for b in range(a + 1, m.beta):
                    merged = _merge(0, "", m.out[z][a], m.out[z][b])
                    if merged is not None:
                        push((m.nxt[z][a], m.nxt[z][b]) + merged, len(path) + 1,
                             (("origin", z0, path), a, b))
    explored = 0
    for length in range(1, max_len + 1):
        for cfg in buckets.pop(length, []):
            if dist[cfg] != length:
                continue
            explored += 1
            z1, z2, lead, left = cfg
            if z1 == z2 and not left:
                return ILVerdict("violation", max_len, witness=_witness(parent, cfg),
                                 explored=explored)
            if explored > budget:
                return ILVerdict("undecided", max_len, explored=explored)
            for a in range(m.beta):
                for b in range(m.beta):
                    merged = _merge(lead, left, m.out[z1][a], m.out[z2][b])
                    if merged is None:
                        continue
                    new = (m.nxt[z1][a], m.nxt[z2][b]) + merged
                    if length + 1 > max_len and new not in dist:
                        # a continuation exists beyond the bound
                        buckets.setdefault(max_len + 1, []).append(new)
                        continue
                    push(new, length + 1, (cfg, a, b))
    return ILVerdict("no_violation", max_len, exhaustive=not buckets, explored=explored)


def _witness(parent: dict, cfg) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    xs, ys = [], []
    node = cfg
    while True:
        prev, a, b = parent[node]
        xs.append(a)
        ys.append(b)
        if prev[0] == "origin":
            _, z0, path = prev
            break
        node = prev
    return z0, tuple(path) + tuple(reversed(xs)), tuple(path) + tuple(reversed(ys))


def verify_witness(m: FsleSpec, witness) -> bool:
    z0, x, y = witness
    return x != y and len(x) == len(y) and m.output(z0, x) == m.output(z0, y)


# --- machine file format ------------------------------------------------------

_INDEX_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _decode_symbols(text: str, labels: str | None) -> tuple[int, ...]:
    if text == "-":
        return ()
    table = labels if labels is not None else _INDEX_CHARS
    try:
        return tuple(table.index(ch) for ch in text)
    except ValueError:
        raise FormatError(f"unknown symbol in output {text!r}") from None


def _encode_symbols(symbols: SeqT[int], labels: str | None) -> str:
    if not symbols:
        return "-"
    table = labels if labels is not None else _INDEX_CHARS
    return "".join(table[s] for s in symbols)


def parse_machine(text: str) -> tuple[FsreSpec | FsleSpec, str | None]:
    """Parse the text machine format; returns the machine and its labels (if any).

    Header ``FSRE k S alpha [beta]`` or ``FSLE q beta``; optional ``labels``
    and ``init`` lines; then either one ``<output> <next>`` line per
    (state, symbol) in state-major order, or ``<symbol> <state> <output> <next>``
    lines in any order.  ``-`` is the empty output; ``#`` starts a comment.
    """
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise FormatError("empty machine file")
    head = lines[0]
    kind = head[0].upper()
    try:
        nums = [int(t) for t in head[1:]]
    except ValueError:
        raise FormatError(f"bad header {' '.join(head)!r}") from None
    labels = None
    initial = 0
    body = lines[1:]
    while body and body[0][0] in ("labels", "init"):
        if body[0][0] == "labels":
            labels = body[0][1]
        else:
            initial = int(body[0][1])
        body = body[1:]
    if kind == "FSRE":
        if len(nums) not in (3, 4):
            raise FormatError("FSRE header is 'FSRE k S alpha [beta]'")
        k, n_states, alpha = nums[:3]
        beta = nums[3] if len(nums) == 4 else alpha
        n_sym = alpha
    elif kind == "FSLE":
        if len(nums) != 2:
            raise FormatError("FSLE header is 'FSLE q beta'")
        n_states, beta = nums
        n_sym = beta
    else:
        raise FormatError(f"unknown machine kind {head[0]!r}")
    out = [[None] * n_sym for _ in range(n_states)]
    nxt = [[None] * n_sym for _ in range(n_states)]
    try:
        for i, ln in enumerate(body):
            if len(ln) == 2:
                s, x = divmod(i, n_sym)
                o, t = ln
            elif len(ln) == 4:
                x = int(ln[0]) if ln[0].isdigit() else _decode_symbols(ln[0], labels)[0]
                s, o, t = int(ln[1]), ln[2], ln[3]
            else:
                raise FormatError(f"bad table line {' '.join(ln)!r}")
            if kind == "FSRE":
                out[s][x] = _decode_symbols(o, labels)
            else:
                out[s][x] = "" if o == "-" else o
            nxt[s][x] = int(t)
    except (IndexError, ValueError) as e:
        raise FormatError(f"bad machine table: {e}") from None
    if any(v is None for row in out for v in row):
        raise FormatError("machine table is not total")
    try:
        if kind == "FSRE":
            return FsreSpec(k, alpha, beta, n_states, out, nxt, initial), labels
        return FsleSpec(n_states, beta, out, nxt, initial), labels
    except MachineError as e:
        raise FormatError(str(e)) from None


def format_machine(m: FsreSpec | FsleSpec, labels: str | None = None) -> str:
    lines = []
    if isinstance(m, FsreSpec):
        head = f"FSRE {m.k} {m.n_states} {m.alpha}"
        lines.append(head if m.beta == m.alpha else f"{head} {m.beta}")
    else:
        lines.append(f"FSLE {m.q} {m.beta}")
    if labels is not None:
        lines.append(f"labels {labels}")
    if m.initial:
        lines.append(f"init {m.initial}")
    for s, (orow, nrow) in enumerate(zip(m.out, m.nxt)):
        for o, t in zip(orow, nrow):
            text = _encode_symbols(o, labels) if isinstance(m, FsreSpec) else (o or "-")
            lines.append(f"{text} {t}")
    return "\n".join(lines) + "\n"

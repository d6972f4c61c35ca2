"""Experiment grids: rate of each scheme next to both lower bounds, written as CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .bits import ceil_log2
from .bounds import lower_bound_1, lower_bound_2
from .core import (DEFAULT_ENUM_LIMIT, Budget, DistortionModel, EnumerationLimitError, Sequence,
                   ball_indices, parse_fraction)
from .gen import generate
from .schemes import encode
from .seqio import load_sequence
from .universal import build_universal

COLUMNS = ["generator", "seed", "n", "k", "ell", "q", "D", "scheme", "rho", "bound1", "bound2",
           "best", "neg_log_u_per_symbol", "escape_rate", "q_eff", "flagged", "rho_ge_best"]


@dataclass
class ExperimentSpec:
    generator: str = "markov"
    params: dict = field(default_factory=lambda: {"matrix": "9/10 1/10; 1/10 9/10"})
    seeds: list[int] = field(default_factory=lambda: [0])
    n: int = 120
    file: str | None = None
    k: list[int] = field(default_factory=lambda: [4])
    ell: list[int] = field(default_factory=lambda: [2])
    q: list[int] = field(default_factory=lambda: [1])
    D: list[str] = field(default_factory=lambda: ["0"])
    schemes: list[str] = field(default_factory=lambda: ["raw", "A", "B", "C"])
    dist: str = "hamming"
    beta: int | None = None
    max_draws: int = 1 << 14
    limit: int = DEFAULT_ENUM_LIMIT

    def __post_init__(self):
        self.schemes = [s if s == "raw" else s.upper() for s in self.schemes]
        for s in self.schemes:
            if s not in ("raw", "A", "B", "C"):
                raise ValueError(f"unknown scheme {s!r}")
        for k in self.k:
            for ell in self.ell:
                if ell < 1 or k % ell:
                    raise ValueError(f"ell={ell} does not divide k={k}")
        for d in self.D:
            if parse_fraction(d) < 0:
                raise ValueError("D must be nonnegative")
        if any(q < 1 for q in self.q):
            raise ValueError("q must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> ExperimentSpec:
        raw = json.loads(text)
        raw["D"] = [str(d) for d in raw.get("D", ["0"])]
        return cls(**raw)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def sources(self) -> list[tuple[str, int, Sequence]]:
        if self.file:
            return [(Path(self.file).name, 0, load_sequence(self.file))]
        return [(self.generator, s, generate(self.generator, self.n, s, **self.params))
                for s in self.seeds]


def effective_q(scheme: str, k: int, beta: int, n: int) -> int:
    """Lossless-encoder states of each scheme realised as a finite-state encoder.

    A and B buffer a whole reproduction block before emitting, which needs one
    state per proper prefix.  C additionally keys its codebook on the block
    position, so its state set multiplies by the number of blocks.
    """
    if scheme == "raw":
        return 1
    prefixes = sum(beta ** j for j in range(k))
    return prefixes * (n // k if scheme == "C" else 1)


def _mean_neg_log_u(x: Sequence, k: int, model: DistortionModel, D: Fraction, limit: int):
    try:
        u = build_universal(k, model.beta)
    except EnumerationLimitError:
        return None
    units = Budget(D, k).units(model)
    total = 0.0
    blocks = len(x) // k
    for i in range(blocks):
        w = u.ball_weight(ball_indices(x.symbols[i * k:(i + 1) * k], model, units, limit))
        total += math.log2(u.total) - math.log2(w)
    return total / (blocks * k)


def run_cell(spec: ExperimentSpec, name: str, seed: int, x: Sequence, k: int, ell: int,
             D: Fraction) -> list[dict]:
    model = DistortionModel.named(spec.dist, x.alphabet.size, spec.beta)
    n = len(x)
    cache: dict = {}
    bounds = {}
    for q in spec.q:
        b1 = lower_bound_1(x, k, q, model, D, spec.limit, cache)
        b2 = lower_bound_2(x, k, ell, q, model, D, spec.limit, cache)
        bounds[q] = (b1.value, b2.value)
    nlu = _mean_neg_log_u(x, k, model, D, spec.limit)
    rates = {}
    for scheme in spec.schemes:
        if scheme == "raw":
            rates[scheme] = (float(ceil_log2(model.beta)), 0.0)
            continue
        res = encode(x, scheme, k, model, D, ell=ell, seed=seed, max_draws=spec.max_draws,
                     limit=spec.limit)
        rates[scheme] = (res.rho, res.escapes / (n // k) if scheme == "C" else 0.0)
    rows = []
    for q in spec.q:
        b1, b2 = bounds[q]
        best = max(b1, b2)
        for scheme in spec.schemes:
            rho, esc = rates[scheme]
            q_eff = effective_q(scheme, k, model.beta, n)
            flagged = q >= q_eff
            rows.append({
                "generator": name, "seed": seed, "n": n, "k": k, "ell": ell, "q": q,
                "D": str(D), "scheme": scheme, "rho": rho, "bound1": b1, "bound2": b2,
                "best": best, "neg_log_u_per_symbol": "" if nlu is None else nlu,
                "escape_rate": esc, "q_eff": q_eff, "flagged": int(flagged),
                "rho_ge_best": int(rho >= best) if flagged else "",
            })
    return rows


def _run_cell_args(args):
    return run_cell(*args)


def grid(spec: ExperimentSpec) -> list[tuple]:
    cells = []
    for name, seed, x in spec.sources():
        for k in spec.k:
            if len(x) % k:
                raise ValueError(f"source length {len(x)} is not divisible by k={k}")
            for ell in spec.ell:
                for d in spec.D:
                    cells.append((spec, name, seed, x, k, ell, parse_fraction(d)))
    return cells


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> list[dict]:
    """All grid rows, in grid order regardless of ``jobs``."""
    cells = grid(spec)
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_cell_args, cells))
    else:
        chunks = [run_cell(*c) for c in cells]
    return [row for chunk in chunks for row in chunk]


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def rows_to_csv(rows: list[dict], columns: list[str] = COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({c: _fmt(row.get(c, "")) for c in columns})
    return buf.getvalue()


def gnuplot_script(csv_path: str, scheme_columns=("A", "B", "C")) -> str:
    """A gnuplot script plotting rho and best bound against D (first k, q in the file)."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'D'",
        "set ylabel 'bits per symbol'",
        "frac(s) = (strstrt(s,'/') ? real(s[1:strstrt(s,'/')-1]) / real(s[strstrt(s,'/')+1:]) : real(s))",
        f"file = '{csv_path}'",
    ]
    plots = [f"file using (strcol(8) eq '{s}' ? frac(strcol(7)) : 1/0):9 with linespoints title 'rho {s}'"
             for s in scheme_columns]
    plots.append("file using (frac(strcol(7))):12 with points title 'best bound'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def check_monotone(rows: list[dict]) -> list[str]:
    """Bound values must not increase with D (fixed k, ell, q) nor with q (fixed k, ell, D)."""
    problems = []
    seen = {}
    for r in rows:
        key = (r["generator"], r["seed"], r["k"], r["ell"], r["q"], Fraction(r["D"]))
        seen[key] = (r["bound1"], r["bound2"])
    by_d: dict = {}
    by_q: dict = {}
    for (g, s, k, ell, q, D), vals in seen.items():
        by_d.setdefault((g, s, k, ell, q), []).append((D, vals))
        by_q.setdefault((g, s, k, ell, D), []).append((q, vals))
    for label, groups in (("D", by_d), ("q", by_q)):
        for key, series in groups.items():
            series.sort()
            for (a, va), (b, vb) in zip(series, series[1:]):
                for i, name in enumerate(("bound1", "bound2")):
                    if vb[i] > va[i]:
                        problems.append(f"{name} increases in {label} at {key}: {a}->{b}")
    return problems

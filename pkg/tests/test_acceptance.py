"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the criterion lines are printed
even when pytest captures output.
"""

import math
import time
from fractions import Fraction
from itertools import product

import pytest

from fslossy.bounds import (ball_stats, best_bound, chain_report, generalized_kraft_check,
                            lower_bound_1, lower_bound_2)
from fslossy.core import (Alphabet, Budget, DistortionModel, Sequence, ball_indices,
                          distortion_units, index_to_seq)
from fslossy.experiment import ExperimentSpec, check_monotone, rows_to_csv, run_experiment
from fslossy.fsm import (FsleSpec, all_lambda_fsle, block_lz_fsle, block_mapper_to_fsre,
                         budget_fsre, check_distortion_compliance, check_information_lossless,
                         fsle_run, fsre_run, identity_fsre, parse_machine, prefix_code_fsle,
                         raw_fsle, verify_witness)
from fslossy.gen import iid, markov, parse_matrix, periodic
from fslossy.lz78 import (clogc, incremental_parse, k_eps, lz_decode, lz_encode, lz_table,
                          within_raw_bound)
from fslossy.prf import prf_u128, uniform_below
from fslossy.schemes import choose_a, decode, encode, scheme_b_envelope
from fslossy.universal import build_universal, neg_log2_ratio

GRID_K = (4, 8, 10, 12)
GRID_D = ("0", "1/8", "1/4", "1/2")
GRID_Q = (1, 2, 4)
GRID_ELL = 2
GRID_N = 120
GRID_MAX_DRAWS = 1 << 14


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return emit


def prf_symbols(n, beta, seed, stream=0):
    out = []
    counter = 0
    while len(out) < n:
        v = prf_u128(seed, stream, counter)
        counter += 1
        for _ in range(min(64, n - len(out))):
            v, s = divmod(v, beta)
            out.append(s)
    return tuple(out)


# ---------------------------------------------------------------------------
def test_criterion_1_examples(report):
    t0 = time.perf_counter()
    ab = Alphabet.from_labels("ab")
    p = incremental_parse(Sequence.from_text("abbabaabbaaabaa", ab))
    words = ["".join("ab"[s] for s in ph) for ph in p.phrase_strings()]
    abc = Alphabet.from_labels("abc")
    m = block_mapper_to_fsre(lambda b: b[:3] + (b[2],) + b[4:], 5, 3)
    run = fsre_run(m, Sequence.from_text("aabcc", abc), abc)
    elapsed = time.perf_counter() - t0
    ok = (p.c == 8 and words == ["a", "b", "ba", "baa", "bb", "aa", "ab", "aa"]
          and run.xhat.to_text() == "aabbc" and list(run.y[:4]) == [()] * 4 and elapsed < 1.0)
    report(1, ok, f"c={p.c} phrases={','.join(words)}; Example-1 x̂={run.xhat.to_text()}; {elapsed:.3f}s")
    assert ok


# ---------------------------------------------------------------------------
def test_criterion_2_lz78_codec(report):
    t0 = time.perf_counter()
    failures = 0
    for i in range(10 ** 4):
        alpha = (2, 3, 4)[i % 3]
        n = uniform_below(10 ** 4 + 1, 2, 1, i)
        x = prf_symbols(n, alpha, seed=i, stream=2)
        failures += lz_decode(lz_encode(x, alpha), n, alpha).symbols != x
    for k in range(0, 13):
        for x in product(range(2), repeat=k):
            failures += lz_decode(lz_encode(x, 2), k, 2).symbols != x
    kraft_bad = raw_bad = 0
    cases = 0
    for beta, kmax in ((2, 14), (3, 8)):
        for k in range(1, kmax + 1):
            tab = lz_table(k, beta)
            lengths = tab.lengths.tolist()
            lmax = max(lengths)
            kraft_bad += sum(1 << (lmax - b) for b in lengths) > 1 << lmax
            for b, c in zip(lengths, tab.counts.tolist()):
                cases += 1
                raw_bad += not within_raw_bound(b, c, beta)
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and kraft_bad == 0 and raw_bad == 0
    report(2, ok, f"round-trip failures={failures}; Kraft violations={kraft_bad}; "
                  f"raw-envelope violations={raw_bad}/{cases}; {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------------------
def test_criterion_3_chain(report):
    H = DistortionModel.hamming(2)
    violations = checked = 0
    for b in range(100):
        x = Sequence(prf_symbols(10, 2, seed=3000 + b), Alphabet(2))
        for D in (Fraction(0), Fraction(1, 10), Fraction(1, 5)):
            ch = chain_report(x, H, D)
            checked += 1
            violations += not (ch.clogc_vs_lz() and ch.lz_vs_sum() and ch.sum_vs_u())
    ok = violations == 0
    report(3, ok, f"{checked} (block, D) cases, violations={violations}")
    assert ok


# ---------------------------------------------------------------------------
def _grid_sources():
    return [
        ("iid2", iid([1, 1], GRID_N, 11)),
        ("markov2", markov(parse_matrix("9/10 1/10; 1/5 4/5"), GRID_N, 12)),
        ("iid3", iid([1, 1, 1], GRID_N, 13)),
        ("markov3", markov(parse_matrix("8/10 1/10 1/10; 1/10 8/10 1/10; 1/10 1/10 8/10"), GRID_N, 14)),
    ]


@pytest.fixture(scope="module")
def grid():
    """Run every scheme on every grid cell; keep what the criteria need."""
    out = {"semifaithful_violations": 0, "decode_mismatch": 0, "blocks": 0,
           "a_envelope_violations": 0, "b_envelope_violations": 0, "bound_rows": [],
           "cells": 0, "escapes": 0, "c_blocks": 0}
    for name, x in _grid_sources():
        beta = x.alphabet.size
        model = DistortionModel.hamming(beta)
        for k in GRID_K:
            for dtext in GRID_D:
                D = Fraction(dtext)
                units = Budget(D, k).units(model)
                out["cells"] += 1
                stats = [ball_stats(blk.symbols, model, units, GRID_ELL) for blk in x.blocks(k)]
                cache = {}
                for blk, st in zip(x.blocks(k), stats):
                    cache[("b1", blk.symbols)] = st
                    cache[("b2", GRID_ELL, blk.symbols)] = st
                for q in GRID_Q:
                    b1 = lower_bound_1(x, k, q, model, D, _cache=cache)
                    b2 = lower_bound_2(x, k, GRID_ELL, q, model, D, _cache=cache)
                    out["bound_rows"].append({"generator": name, "seed": 0, "k": k, "ell": GRID_ELL,
                                              "q": q, "D": dtext, "bound1": b1.value,
                                              "bound2": b2.value})
                for scheme in "ABC":
                    res = encode(x, scheme, k, model, D, ell=GRID_ELL, seed=k * 100 + beta,
                                 max_draws=GRID_MAX_DRAWS)
                    dec = decode(res.data)
                    out["decode_mismatch"] += dec.blocks != res.blocks
                    for i, blk in enumerate(x.blocks(k)):
                        out["blocks"] += 1
                        if distortion_units(blk.symbols, dec.blocks[i], model) > units:
                            out["semifaithful_violations"] += 1
                        if scheme == "A" and res.block_bits[i] > clogc(stats[i].min_c) + k_eps(k, beta):
                            out["a_envelope_violations"] += 1
                        if scheme == "B" and res.block_bits[i] > scheme_b_envelope(
                                stats[i].min_entropy, k, GRID_ELL, beta) + 1e-9:
                            out["b_envelope_violations"] += 1
                    if scheme == "C":
                        out["escapes"] += res.escapes
                        out["c_blocks"] += len(res.blocks)
    return out


def _constructed_encoders():
    """(label, FSRE, FSLE, k, D) with the FSRE distortion-compliant at D."""
    H2, H3 = DistortionModel.hamming(2), DistortionModel.hamming(3)
    quarter = Fraction(1, 4)
    units8 = Budget(quarter, 8).units(H2)
    ternary_prefix = FsleSpec(1, 3, (("0", "10", "11"),), ((0, 0, 0),))
    return [
        ("raw binary", identity_fsre(2, 8), raw_fsle(2), 8, Fraction(0), H2),
        ("raw ternary", identity_fsre(3, 6), raw_fsle(3), 6, Fraction(0), H3),
        ("raw binary, slack D", identity_fsre(2, 8), raw_fsle(2), 8, quarter, H2),
        ("budget + raw", budget_fsre(8, H2, quarter), raw_fsle(2), 8, quarter, H2),
        ("budget ternary + prefix", budget_fsre(6, H3, Fraction(1, 3)), ternary_prefix, 6,
         Fraction(1, 3), H3),
        ("budget + pair prefix (q=3)", budget_fsre(8, H2, quarter),
         prefix_code_fsle(["0", "10", "110", "111"], 2, 2), 8, quarter, H2),
        ("scheme A block FSRE + block LZ", block_mapper_to_fsre(
            lambda b: choose_a(b, H2, units8), 8, 2), block_lz_fsle(8, 2), 8, quarter, H2),
        ("scheme A block FSRE (D=0) + block LZ", identity_fsre(2, 10), block_lz_fsle(10, 2), 10,
         Fraction(0), H2),
    ]


def test_criterion_4_bound_validity(report, grid):
    violations = checked = 0
    detail = []
    sources2 = [iid([1, 1], 240, 41), markov(parse_matrix("19/20 1/20; 1/20 19/20"), 240, 42),
                periodic((0, 1, 1), 240), iid([7, 1], 240, 43)]
    sources3 = [iid([1, 1, 1], 240, 44), markov(parse_matrix("3/4 1/8 1/8; 1/8 3/4 1/8; 1/8 1/8 3/4"), 240, 45)]
    for label, fsre, fsle, k, D, model in _constructed_encoders():
        assert check_distortion_compliance(fsre, model, Budget(D, k)).compliant, label
        il = check_information_lossless(fsle, 2 * fsle.q * fsle.q + k, budget=1 << 22)
        assert il.status == "no_violation", label
        for x in (sources2 if model.alpha == 2 else sources3):
            xhat = fsre_run(fsre, x).xhat
            bits, _ = fsle_run(fsle, xhat)
            rho = len(bits) / len(x)
            for ell in (1, 2):
                b = best_bound(x, k, ell, fsle.q, model, D)
                checked += 1
                if rho < b.value:
                    violations += 1
                    detail.append((label, rho, b.value))
    mono = check_monotone(grid["bound_rows"])
    ok = violations == 0 and not mono
    report(4, ok, f"{checked} encoder/source/ell checks, rho<best violations={violations}; "
                  f"monotonicity problems={len(mono)} over {len(grid['bound_rows'])} grid bound rows")
    assert ok, (detail, mono[:5])


def test_criterion_5_semifaithful(report, grid):
    ok = grid["semifaithful_violations"] == 0 and grid["decode_mismatch"] == 0
    report(5, ok, f"{grid['cells']} cells x 3 schemes, {grid['blocks']} decoded blocks, "
                  f"violations={grid['semifaithful_violations']}, decode mismatches={grid['decode_mismatch']}, "
                  f"scheme-C escapes={grid['escapes']}/{grid['c_blocks']} (max_draws=2^14)")
    assert ok


def test_criterion_6_scheme_a_envelope(report, grid):
    ok = grid["a_envelope_violations"] == 0
    report(6, ok, f"scheme A blocks over min_clogc + k·eps(k): {grid['a_envelope_violations']}")
    assert ok


def test_criterion_7_scheme_b_envelope(report, grid):
    H = DistortionModel.hamming(2)
    D = Fraction(1, 4)
    units = Budget(D, 8).units(H)
    bad_rt = 0
    for x in product(range(2), repeat=8):
        res = encode(Sequence(x, Alphabet(2)), "B", 8, H, D, ell=2)
        dec = decode(res.data)
        bad_rt += dec.blocks != res.blocks or distortion_units(x, dec.blocks[0], H) > units
    ok = grid["b_envelope_violations"] == 0 and bad_rt == 0
    report(7, ok, f"scheme B envelope violations={grid['b_envelope_violations']}; "
                  f"exhaustive k=8 ell=2 round-trip failures={bad_rt}/256")
    assert ok


# ---------------------------------------------------------------------------
def test_criterion_8_scheme_c_envelope(report):
    k, beta = 10, 2
    H = DistortionModel.hamming(beta)
    D = Fraction(1, 4)
    u = build_universal(k, beta)
    units = Budget(D, k).units(H)
    overhead = 2 * math.log2(1 + k * math.log2(beta)) + 8
    lengths, envelopes = [], []
    escapes = mismatches = 0
    blocks = [Sequence(prf_symbols(k, beta, seed=8000 + b), Alphabet(beta)) for b in range(20)]
    for seed in range(10):
        x = Sequence(tuple(s for blk in blocks for s in blk.symbols), Alphabet(beta))
        res = encode(x, "C", k, H, D, seed=seed, max_draws=1 << 20)
        dec = decode(res.data)
        mismatches += dec.blocks != res.blocks or dec.xhat.symbols != tuple(
            s for b in res.blocks for s in b)
        escapes += res.escapes
        for i, blk in enumerate(blocks):
            w = u.ball_weight(ball_indices(blk.symbols, H, units))
            lengths.append(res.block_bits[i])
            envelopes.append(neg_log2_ratio(w, u.total) + overhead)
    pairs = len(lengths)
    mean_len = sum(lengths) / pairs
    mean_env = sum(envelopes) / pairs
    rate = escapes / pairs
    ok = pairs >= 200 and mean_len <= mean_env and rate < 0.01 and mismatches == 0
    report(8, ok, f"{pairs} (block, seed) pairs: mean length {mean_len:.3f} <= envelope {mean_env:.3f}; "
                  f"escape rate {rate:.4f}; decode mismatches={mismatches}")
    assert ok


# ---------------------------------------------------------------------------
SPARSE_MATRICES = ["9/10 1/10; 1/10 9/10", "7/10 3/10; 3/10 7/10", "19/20 1/20; 1/5 4/5",
                   "1/2 1/2; 1/2 1/2", "3/5 2/5; 1/10 9/10"]


def _sparse_specs():
    return [ExperimentSpec(generator="markov", params={"matrix": m}, seeds=[0, 1, 2, 3], n=240,
                           k=[12], ell=[2], q=[1], D=["1/4"], schemes=["A", "C"],
                           max_draws=1 << 20) for m in SPARSE_MATRICES]


def test_criterion_9_large_q_advantage(report):
    H = DistortionModel.hamming(2)
    k = 12
    u = build_universal(k, 2)
    units = Budget(Fraction(1, 4), k).units(H)
    lengths = u.table.lengths
    exact_bad = blocks = 0
    rows = []
    for spec in _sparse_specs():
        for _, _, x in spec.sources():
            for blk in x.blocks(k):
                ball = ball_indices(blk.symbols, H, units)
                w = u.ball_weight(ball)
                min_lz = min(int(lengths[i]) for i in ball)
                blocks += 1
                exact_bad += u.total > w << min_lz  # -log2 U[B] <= min LZ, exactly
        rows += run_experiment(spec)
    csv1 = rows_to_csv(rows)
    csv2 = rows_to_csv([r for spec in _sparse_specs() for r in run_experiment(spec)])
    per = {}
    for i in range(0, len(rows), 2):
        a, c = rows[i], rows[i + 1]
        assert a["scheme"] == "A" and c["scheme"] == "C"
        per[i // 2] = c["rho"] < a["rho"]
    wins = sum(per.values())
    frac = wins / len(per)
    ok = exact_bad == 0 and frac >= 0.8 and csv1 == csv2
    report(9, ok, f"{blocks} blocks, -log2 U[B] > min LZ on {exact_bad}; scheme C rho < scheme A rho "
                  f"on {wins}/{len(per)} sequences ({frac:.0%}); CSV deterministic={csv1 == csv2}")
    assert ok


# ---------------------------------------------------------------------------
def _random_fsles(count):
    words = ["", "0", "1", "00", "01", "10", "11", "011"]
    out = []
    seed = 0
    while len(out) < count:
        seed += 1
        draw = iter(prf_u128(seed, 10, j) for j in range(16))
        q, beta = 2, 2
        outs = tuple(tuple(words[next(draw) % len(words)] for _ in range(beta)) for _ in range(q))
        nxts = tuple(tuple(next(draw) % q for _ in range(beta)) for _ in range(q))
        m = FsleSpec(q, beta, outs, nxts)
        if check_information_lossless(m, 2 * q * q + 3).status == "no_violation":
            out.append(m)
    return out


def test_criterion_10_generalized_kraft(report):
    from pathlib import Path
    machines = Path(__file__).parents[1] / "data" / "machines"
    corpus = [raw_fsle(2), raw_fsle(3), raw_fsle(4),
              prefix_code_fsle(["0", "10", "110", "111"], 2, 2),
              FsleSpec(1, 3, (("0", "10", "11"),), ((0, 0, 0),)),
              block_lz_fsle(4, 2)]
    for f in ("raw2.fsle", "prefix_pairs.fsle"):
        corpus.append(parse_machine((machines / f).read_text())[0])
    corpus += _random_fsles(12)
    checked = failed = 0
    for m in corpus:
        for ell in (1, 2, 3):
            if m.beta ** ell > 1 << 12:
                continue
            r = generalized_kraft_check(m, ell)
            checked += 1
            failed += not r.passed
    lam = check_information_lossless(all_lambda_fsle(2), 4)
    rejected = lam.status == "violation" and verify_witness(all_lambda_fsle(2), lam.witness)
    ok = failed == 0 and rejected
    report(10, ok, f"{len(corpus)} IL-validated FSLEs, {checked} (machine, ell) Kraft checks, "
                   f"failures={failed}; all-lambda rejected with witness {lam.witness}")
    assert ok

import math
from fractions import Fraction

import pytest

from fslossy.bounds import (LosslessUndecidedError, NotLosslessError, ball_stats, best_bound,
                            bound1_correction, bound2_correction, chain_report,
                            generalized_kraft_check, kraft_rhs, lower_bound_1, lower_bound_2)
from fslossy.core import Alphabet, Budget, DistortionModel, Sequence, ball_indices, index_to_seq
from fslossy.empirical import entropy_of_counts
from fslossy.fsm import FsleSpec, all_lambda_fsle, check_information_lossless, prefix_code_fsle, raw_fsle
from fslossy.lz78 import c_max, clogc, phrase_count
from fslossy.prf import uniform_below

B2 = Alphabet(2)
H2 = DistortionModel.hamming(2)


def rand_seq(n, seed, beta=2):
    return Sequence(tuple(uniform_below(beta, seed, 0, j) for j in range(n)), Alphabet(beta))


def test_lossless_main_term_is_clogc():
    x = rand_seq(40, 1)
    rep = lower_bound_1(x, 8, 1, H2, 0)
    for blk, main in zip(x.blocks(8), rep.per_block_main_terms):
        assert main == pytest.approx(clogc(phrase_count(blk.symbols)) / 8)
    assert len(rep.per_block_main_terms) == 5


def test_whole_space_min_c_is_three():
    x = Sequence((0, 1, 1, 0), B2)
    rep = lower_bound_1(x, 4, 1, H2, 1)
    assert rep.per_block_main_terms[0] * 4 == pytest.approx(3 * math.log2(3))
    # independent oracle: min c over all 16 strings
    assert min(phrase_count(index_to_seq(i, 4, 2)) for i in range(16)) == 3


def test_q_affects_only_correction():
    x = rand_seq(40, 2)
    r1, r4 = lower_bound_1(x, 10, 1, H2, Fraction(1, 10)), lower_bound_1(x, 10, 4, H2, Fraction(1, 10))
    assert r1.per_block_main_terms == r4.per_block_main_terms
    assert r4.correction > r1.correction
    assert r4.value <= r1.value


def test_correction_formulas():
    assert bound1_correction(15, 2, 1) == pytest.approx(8 / 15 * 2 + 2 / 15)
    assert bound2_correction(2, 2, 1) == pytest.approx(math.log2(1 + math.log2(5)) / 2)


def test_constant_source_bound2_zero():
    x = Sequence((0,) * 16, B2)
    rep = lower_bound_2(x, 8, 2, 1, H2, 0)
    assert rep.per_block_main_terms == [0.0, 0.0]
    assert rep.value == 0.0


def test_ell_equals_k_entropy_zero():
    x = rand_seq(16, 3)
    assert lower_bound_2(x, 8, 8, 1, H2, 0).per_block_main_terms == [0.0, 0.0]


def test_bound2_exhaustive_oracle():
    x = Sequence((0, 1, 1, 0, 1, 0, 0, 1), B2)
    rep = lower_bound_2(x, 8, 2, 2, H2, Fraction(1, 4))
    best = math.inf
    for i in ball_indices(x.symbols, H2, 2):
        y = index_to_seq(i, 8, 2)
        pairs = [y[j:j + 2] for j in range(0, 8, 2)]
        best = min(best, entropy_of_counts([pairs.count(p) for p in set(pairs)]))
    assert rep.per_block_main_terms[0] == pytest.approx(best / 2)
    assert rep.value == max(0.0, best / 2 - bound2_correction(2, 2, 2))


def test_divisibility_errors():
    with pytest.raises(ValueError):
        lower_bound_1(rand_seq(10, 1), 4, 1, H2, 0)
    with pytest.raises(ValueError):
        lower_bound_2(rand_seq(12, 1), 6, 4, 1, H2, 0)


def test_best_is_max_and_degenerate_tie():
    x = rand_seq(60, 4)
    b = best_bound(x, 10, 2, 1, H2, Fraction(1, 10))
    assert b.value == max(b.bound1.value, b.bound2.value)
    assert b.value >= b.bound1.value and b.value >= b.bound2.value
    z = best_bound(Sequence((0,) * 16, B2), 8, 2, 1, H2, 0)
    assert z.value == 0.0 and z.which == "tie"


def test_both_dominance_directions_occur():
    # found by searching single random blocks at D=0, q=1
    b = best_bound(rand_seq(10, 0), 10, 2, 1, H2, 0)
    assert b.which == "bound1" and b.bound1.value > b.bound2.value
    b = best_bound(rand_seq(8, 4), 8, 2, 1, H2, 0)
    assert b.which == "bound2" and b.bound2.value > b.bound1.value


def test_chain_full_and_singleton():
    x = Sequence((0, 1, 1, 0, 1, 0), B2)
    full = chain_report(x, H2, 1)
    assert full.neg_log_u == 0.0 and full.ordered()
    single = chain_report(x, H2, 0)
    assert single.neg_log_sum == single.min_lz
    assert single.ordered()


def test_chain_random_blocks():
    for seed in range(30):
        x = rand_seq(10, 100 + seed)
        for D in (Fraction(1, 10), Fraction(1, 5)):
            assert chain_report(x, H2, D).ordered()


def test_ball_stats_tie_break_lexicographic():
    st = ball_stats((0, 0, 0, 0), H2, 4)
    assert st.argmin_c == min(i for i in range(16) if phrase_count(index_to_seq(i, 4, 2)) == st.min_c)


def test_kraft_raw_examples():
    r = generalized_kraft_check(raw_fsle(2), 1)
    assert r.lhs == 1 and r.rhs == pytest.approx(1 + math.log2(3)) and r.passed
    r = generalized_kraft_check(raw_fsle(2), 3)
    assert r.lhs == Fraction(8, 8) and r.passed
    assert kraft_rhs(2, 2, 2) == pytest.approx(4 * (1 + math.log2(2)))


def test_kraft_prefix_code():
    r = generalized_kraft_check(prefix_code_fsle(["0", "10", "110", "111"], 2, 2), 2)
    assert r.lhs == Fraction(3, 2) and r.passed


def test_kraft_random_two_state_exhaustive():
    m = FsleSpec(2, 2, (("0", "10"), ("11", "0")), ((1, 0), (0, 1)))
    r = generalized_kraft_check(m, 3)
    expected = Fraction(0)
    for i in range(8):
        v = index_to_seq(i, 3, 2)
        expected += Fraction(1, 2 ** min(m.output_length(z, v) for z in range(2)))
    assert r.lhs == expected and r.passed


def test_kraft_rejects_non_lossless():
    with pytest.raises(NotLosslessError):
        generalized_kraft_check(all_lambda_fsle(2), 2)


def test_kraft_rejects_undecided():
    m = prefix_code_fsle(["0", "10", "110", "111"], 2, 2)
    verdict = check_information_lossless(m, 100, budget=0)
    if verdict.status == "undecided":
        with pytest.raises(LosslessUndecidedError):
            generalized_kraft_check(m, 2, il_max_len=100, il_budget=0)

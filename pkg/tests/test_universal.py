from fractions import Fraction

import pytest

from fslossy.core import Alphabet, Budget, DistortionModel, EnumerationLimitError, FormatError, Sequence
from fslossy.lz78 import lz_code_length, lz_table
from fslossy.core import index_to_seq
from fslossy.universal import (build_universal, load_table, neg_log_u_ball, save_table, u_ball_mass,
                               u_sample)


def test_partition_k4_binary():
    u = build_universal(4, 2)
    direct = sum(Fraction(1, 2 ** lz_code_length(index_to_seq(i, 4, 2), 2)) for i in range(16))
    assert u.partition == direct == Fraction(5, 16)


def test_k1_is_uniform():
    u = build_universal(1, 2)
    assert u.prob(0) == u.prob(1) == Fraction(1, 2)


def test_partition_at_most_one():
    for k, beta in [(6, 2), (10, 2), (5, 3)]:
        assert build_universal(k, beta).partition <= 1


def test_ball_mass_example():
    u = build_universal(8, 2)
    x = Sequence((0,) * 8, Alphabet(2))
    assert u_ball_mass(u, x, DistortionModel.hamming(2), Budget(Fraction(1, 4), 8)) == Fraction(65, 252)


def test_full_ball_has_zero_neg_log():
    u = build_universal(5, 2)
    x = Sequence((0, 1, 0, 1, 1), Alphabet(2))
    assert neg_log_u_ball(u, x, DistortionModel.hamming(2), Budget(1, 5)) == 0.0


def test_sampling_deterministic_and_in_range():
    u = build_universal(4, 2)
    draws = [u.sample_index(1, 0, j) for j in range(1, 11)]
    assert draws == [8, 11, 5, 1, 7, 15, 14, 15, 6, 8]
    assert u_sample(u, 1, 0, 1).symbols == (1, 0, 0, 0)


def test_sampling_frequencies_match_weights():
    u = build_universal(3, 2)
    n = 20000
    counts = [0] * 8
    for j in range(1, n + 1):
        counts[u.sample_index(5, 2, j)] += 1
    for i in range(8):
        p = float(u.prob(i))
        sigma = (n * p * (1 - p)) ** 0.5
        assert abs(counts[i] - n * p) < 5 * sigma


def test_limit():
    with pytest.raises(EnumerationLimitError):
        build_universal(30, 2)


def test_cache_roundtrip_and_corruption(tmp_path):
    tab = lz_table(8, 2)
    path = tmp_path / "t.fslz"
    save_table(path, tab)
    back = load_table(path)
    assert (back.lengths == tab.lengths).all()
    data = bytearray(path.read_bytes())
    body = data[13:]
    data[13:] = bytes((b + 1) % 256 for b in body)
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        load_table(path)
    path.write_bytes(b"nope")
    with pytest.raises(FormatError):
        load_table(path)


def test_singleton_ball_mass():
    u = build_universal(6, 2)
    x = Sequence((0, 1, 1, 0, 1, 0), Alphabet(2))
    idx = x.index()
    assert u_ball_mass(u, x, DistortionModel.hamming(2), Budget(0, 6)) == u.prob(idx)
    import math
    expect = u.lz_length(idx) + math.log2(u.partition)
    assert neg_log_u_ball(u, x, DistortionModel.hamming(2), Budget(0, 6)) == pytest.approx(expect)


def test_probabilities_sum_to_one():
    u = build_universal(5, 3)
    assert sum(u.prob(i) for i in range(3 ** 5)) == 1


def test_mass_monotone_in_D():
    u = build_universal(8, 2)
    h = DistortionModel.hamming(2)
    x = Sequence((0, 1, 1, 0, 0, 0, 1, 0), Alphabet(2))
    masses = [u_ball_mass(u, x, h, Budget(Fraction(j, 8), 8)) for j in range(9)]
    assert masses == sorted(masses) and masses[-1] == 1


def test_neg_log_u_below_min_lz_exhaustive_k10():
    from fslossy.core import ball_indices
    u = build_universal(10, 2)
    h = DistortionModel.hamming(2)
    lengths = u.table.lengths
    for xi in range(1024):
        x = index_to_seq(xi, 10, 2)
        for units in (0, 1, 2):
            ball = ball_indices(x, h, units)
            w = u.ball_weight(ball)
            min_lz = min(int(lengths[i]) for i in ball)
            # -log2(w/total) <= min_lz  <=>  total <= w * 2^min_lz
            assert u.total <= w << min_lz


def test_frequencies_million_draws_k4():
    u = build_universal(4, 2)
    n = 10 ** 6
    counts = [0] * 16
    sample = u.sample_index
    for j in range(1, n + 1):
        counts[sample(11, 0, j)] += 1
    for i in range(16):
        p = float(u.prob(i))
        assert abs(counts[i] - n * p) < 4 * (n * p * (1 - p)) ** 0.5


def test_streams_decorrelated():
    from scipy.stats import chi2_contingency
    u = build_universal(3, 2)
    n = 4000
    table = [[0] * 8 for _ in range(8)]
    for j in range(1, n + 1):
        table[u.sample_index(3, 0, j)][u.sample_index(3, 1, j)] += 1
    rows = [r for r in table if sum(r)]
    cols = [c for c in range(8) if any(r[c] for r in rows)]
    table = [[r[c] for c in cols] for r in rows]
    assert chi2_contingency(table)[1] > 1e-4

from fractions import Fraction

import pytest

from fslossy.bounds import best_bound
from fslossy.core import DistortionModel
from fslossy.experiment import (ExperimentSpec, check_monotone, effective_q, gnuplot_script,
                                rows_to_csv, run_experiment)
from fslossy.schemes import encode


def small_spec(**kw):
    base = dict(generator="markov", params={"matrix": "9/10 1/10; 1/10 9/10"}, seeds=[1], n=24,
                k=[4], ell=[2], q=[1], D=["1/4"], schemes=["raw", "A", "B", "C"])
    base.update(kw)
    return ExperimentSpec(**base)


def test_single_cell_matches_direct_calls():
    spec = small_spec()
    rows = run_experiment(spec)
    x = spec.sources()[0][2]
    H = DistortionModel.hamming(2)
    b = best_bound(x, 4, 2, 1, H, Fraction(1, 4))
    for r in rows:
        assert r["bound1"] == b.bound1.value and r["bound2"] == b.bound2.value
        if r["scheme"] != "raw":
            res = encode(x, r["scheme"], 4, H, Fraction(1, 4), ell=2, seed=1, max_draws=spec.max_draws)
            assert r["rho"] == res.rho
    assert [r["scheme"] for r in rows] == ["raw", "A", "B", "C"]


def test_csv_deterministic_and_parallel_equal():
    spec = small_spec(seeds=[0, 1], k=[4, 8], D=["0", "1/8", "1/4"], q=[1, 2])
    a = rows_to_csv(run_experiment(spec, jobs=1))
    b = rows_to_csv(run_experiment(spec, jobs=2))
    assert a == b
    assert a.splitlines()[0].startswith("generator,seed,n,k,ell,q,D,scheme,rho")


def test_monotone_and_flagged_rows():
    spec = small_spec(n=48, k=[4, 8], D=["0", "1/8", "1/4", "1/2"], q=[1, 2, 4])
    rows = run_experiment(spec)
    assert check_monotone(rows) == []
    flagged = [r for r in rows if r["flagged"]]
    assert flagged and all(r["rho"] >= r["best"] for r in flagged)


def test_check_monotone_detects_increase():
    rows = [
        {"generator": "g", "seed": 0, "k": 4, "ell": 2, "q": 1, "D": "0", "bound1": 0.1, "bound2": 0.0},
        {"generator": "g", "seed": 0, "k": 4, "ell": 2, "q": 1, "D": "1/4", "bound1": 0.2, "bound2": 0.0},
    ]
    assert check_monotone(rows)


def test_spec_validation_and_json():
    with pytest.raises(ValueError):
        small_spec(k=[5], ell=[2])
    with pytest.raises(ValueError):
        small_spec(D=["-1/4"])
    with pytest.raises(ValueError):
        small_spec(schemes=["Z"])
    spec = small_spec()
    assert ExperimentSpec.from_json(spec.to_json()) == spec


def test_effective_q():
    assert effective_q("raw", 4, 2, 40) == 1
    assert effective_q("A", 4, 2, 40) == 15
    assert effective_q("C", 4, 2, 40) == 150


def test_gnuplot_script_mentions_file():
    assert "out.csv" in gnuplot_script("out.csv")

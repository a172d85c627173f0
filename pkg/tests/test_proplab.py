import json

import numpy as np
import pytest

from biortho.analysis import kperp_spectral
from biortho.bivector import CurvatureBlocks
from biortho.proplab import (
    RandomBlockSpec,
    RejectionBudgetExceeded,
    generate,
    generate_arrays,
    run_suite,
    suite_names,
)


def test_generation_is_deterministic():
    a = generate_arrays(RandomBlockSpec(seed=42, count=10))
    b = generate_arrays(RandomBlockSpec(seed=42, count=10))
    for f in ("s", "wplus", "wminus", "b"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    c = generate_arrays(RandomBlockSpec(seed=43, count=10))
    assert not np.array_equal(a.s, c.s)


def test_generated_blocks_are_valid():
    for blk in generate(RandomBlockSpec(seed=1, count=50)):
        assert abs(np.trace(blk.wplus)) < 1e-12 and abs(np.trace(blk.wminus)) < 1e-12
        assert np.array_equal(blk.wplus, blk.wplus.T)
        assert -10 <= blk.s <= 10


def test_constraints():
    assert all(np.all(b.b == 0) for b in generate(RandomBlockSpec(count=20, einstein=True)))
    for b in generate(RandomBlockSpec(count=20, conformally_flat=True)):
        sp = kperp_spectral(b)
        assert sp.k1perp == sp.k3perp == b.s / 12
    for b in generate(RandomBlockSpec(count=30, nonneg_k1=True)):
        assert kperp_spectral(b).k1perp >= 0


def test_rejection_budget():
    with pytest.raises(RejectionBudgetExceeded):
        generate(RandomBlockSpec(count=1, nonneg_k1=True, s_scale=1e-6, w_scale=100.0))


def test_count_must_be_positive():
    with pytest.raises(ValueError):
        RandomBlockSpec(count=0)


def test_suite_examples():
    rep = run_suite("trace-sum", RandomBlockSpec(count=10_000))
    assert rep.passed and rep.max_residual < 1e-10
    rep = run_suite("spectral-vs-bruteforce", RandomBlockSpec(count=200))
    assert rep.passed and rep.max_residual < 1e-6


def test_einstein_classification_both_ways():
    for spec in (RandomBlockSpec(count=300, einstein=True), RandomBlockSpec(count=300, seed=1)):
        rep = run_suite("einstein-iff-Kperp-eq-K", spec)
        assert rep.passed and rep.max_residual == 0
    assert run_suite("einstein-iff-Kperp-eq-K", RandomBlockSpec(count=50, einstein=True)).extra["positives"] == 50


@pytest.mark.parametrize("name", ["w-trace", "wnorm-chain", "b-cancellation", "conformally-flat", "k1-domination"])
def test_other_suites_pass(name):
    assert run_suite(name, RandomBlockSpec(count=500, seed=3)).passed


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")


def test_counterexamples_are_lossless(monkeypatch):
    import biortho.proplab as pl

    # a deliberately tight tolerance makes the suite fail on a known subset
    def tight(arr, seed):
        res = np.abs(arr.s)
        bad = res > 5.0
        return pl.SuiteReport("abs-s", len(arr), float(res.max()), 5.0, pl._counterexamples(arr, res, bad))

    monkeypatch.setitem(pl.SUITES, "abs-s", tight)
    rep = run_suite("abs-s", RandomBlockSpec(count=50, seed=9))
    assert not rep.passed and rep.counterexamples
    wire = json.loads(json.dumps(rep.as_dict()))["counterexamples"]
    again = run_suite("abs-s", samples=wire)
    assert not again.passed and len(again.counterexamples) == len(wire)
    assert [c["residual"] for c in again.counterexamples] == [c["residual"] for c in wire]
    blk = CurvatureBlocks.from_dict(wire[0])
    assert blk.s == wire[0]["s"]


def test_suite_names_registered():
    assert {"trace-sum", "spectral-vs-bruteforce", "einstein-iff-Kperp-eq-K", "wnorm-chain"} <= set(suite_names())

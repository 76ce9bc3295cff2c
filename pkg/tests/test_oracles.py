import math
from fractions import Fraction

import numpy as np
import pytest

from lpreduce.core import Basis, CvpInstance, LatticeVector
from lpreduce.errors import PromiseViolated, RankOne
from lpreduce.oracles import (
    AdversarialSVP,
    OracleStats,
    adversarial_svp,
    bdd_oracle,
    exact_cvp,
    exact_svp,
    lambda1,
    lambda2,
    usvp_oracle,
)

F = Fraction


def test_exact_svp_examples():
    assert exact_svp(Basis.identity(3), 1)[1] == 1
    v, lam = exact_svp(Basis.from_rows([[2, 1], [0, 2]]), 2)
    assert lam == 2 and v.embedding == (2, 0)
    assert exact_svp(Basis.diagonal([5] * 4), "inf")[1] == 5


def test_exact_svp_tie_break():
    v, _ = exact_svp(Basis.identity(2), 2)
    assert v.coeffs == (0, 1)


def test_exact_cvp_examples():
    v, d = exact_cvp(CvpInstance(Basis.identity(2), (F(2, 5), F(2, 5)), 2))
    assert v.is_zero and d == pytest.approx(math.sqrt(0.32))
    v, d = exact_cvp(CvpInstance(Basis.identity(2), (F(1, 2), 0), 1))
    assert v.is_zero and d == 0.5
    _, d = exact_cvp(CvpInstance(Basis.from_rows([[1, 1], [0, 2]]), (0, 1), 2))
    assert d == 1


def test_exact_cvp_lattice_point():
    B = Basis.from_rows([[2, 1], [0, 3]])
    v, d = exact_cvp(CvpInstance(B, B.apply((2, -1)), 1))
    assert d == 0 and v.coeffs == (2, -1)


def test_lambda2_examples():
    assert lambda2(Basis.identity(2), 2) == 1
    assert lambda2(Basis.diagonal([1, 3]), 2) == 3
    assert lambda2(Basis.from_rows([[1, 0], [0, 1], [0, 0]]), 1) == 1
    with pytest.raises(RankOne):
        lambda2(Basis.identity(1), 2)


def test_usvp_examples():
    ans = usvp_oracle(Basis.diagonal([1, 3]), 2, 1.5)
    assert tuple(abs(x) for x in ans.vector.embedding) == (1, 0)
    with pytest.raises(PromiseViolated):
        usvp_oracle(Basis.identity(2), 2, 1.1, strict=True)
    ans = usvp_oracle(Basis.diagonal([1, 5]), 1, 4, strict=True)
    assert tuple(abs(x) for x in ans.vector.embedding) == (1, 0)


def test_bdd_examples():
    assert bdd_oracle(CvpInstance(Basis.identity(2), (F(1, 10), 0), 2), 2).vector.is_zero
    with pytest.raises(PromiseViolated):
        bdd_oracle(CvpInstance(Basis.identity(2), (F(5, 2), 0), 2), 0.4, strict=True)
    inst = CvpInstance(Basis.diagonal([1, 4]), (F(3, 10), F(19, 10)), "inf")
    assert bdd_oracle(inst, 2).vector.is_zero


def test_adversarial_examples_cover_legal_set():
    rng = np.random.default_rng(1)
    seen = {adversarial_svp(Basis.identity(2), 2, 1, rng).vector.embedding for _ in range(200)}
    assert seen == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    seen = {adversarial_svp(Basis.identity(2), 2, 1.5, rng).vector.embedding for _ in range(400)}
    assert len(seen) == 8
    seen = {adversarial_svp(Basis.diagonal([2, 9]), 1, 2, rng).vector.embedding for _ in range(200)}
    assert seen == {(2, 0), (-2, 0), (4, 0), (-4, 0)}


def test_adversarial_answers_meet_guarantee():
    rng = np.random.default_rng(2)
    B = Basis.from_rows([[3, 1, 0], [1, -2, 1], [0, 1, 4]])
    lam = lambda1(B, "inf")
    oracle = AdversarialSVP(1.5, rng)
    for _ in range(50):
        v = oracle(B, "inf").vector
        assert not v.is_zero and v.norm("inf") <= 1.5 * lam + 1e-12
    assert oracle.stats.calls["SVP"] == 50


def test_oracle_stats_sublattice_audit():
    stats = OracleStats()
    stats.register_parent(Basis.identity(2))
    stats.record("SVP", Basis.diagonal([2, 1]))
    assert stats.sublattice_only
    stats.record("SVP", Basis.diagonal([F(1, 2), 1]))
    assert not stats.sublattice_only

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpreduce.core import (
    BallSpec,
    Basis,
    LatticeVector,
    PNorm,
    count_points,
    count_primitive,
    enumerate_points,
    left_inverse,
    lp_norm,
    primitive_part,
    project_orthogonal,
)
from lpreduce.errors import EnumerationBudgetExceeded, RankOne, SingularBasis, ZeroVector

F = Fraction
UPPER = Basis.from_rows([[1, 1], [0, 2]])


def test_lp_norm_examples():
    assert lp_norm((3, 4), 2) == 5
    assert lp_norm((1, -1, 1), "inf") == 1
    mpmath.mp.dps = 30
    expected = float(mpmath.power(2, mpmath.mpf(2) / 3))
    assert lp_norm((1, 1), 1.5) == pytest.approx(expected, rel=1e-12)


def test_pnorm_parse_and_keys():
    assert PNorm.parse("inf").is_inf
    assert PNorm.parse("1.5").p == 1.5
    assert PNorm.parse(2).key((F(1, 2), F(1, 2))) == F(1, 2)
    with pytest.raises(ValueError):
        PNorm.parse(0.5)


def test_left_inverse_examples():
    assert left_inverse(Basis.identity(3)) == tuple(tuple(F(int(i == j)) for j in range(3)) for i in range(3))
    assert left_inverse(Basis.from_columns([[2, 0]])) == ((F(1, 2), F(0)),)
    assert left_inverse(UPPER) == ((F(1), F(-1, 2)), (F(0), F(1, 2)))


def test_singular_basis_rejected():
    with pytest.raises(SingularBasis):
        Basis.from_columns([[1, 2], [2, 4]])


def test_enumerate_examples():
    pts = enumerate_points(Basis.identity(2), BallSpec(1, 2))
    assert sorted(v.coeffs for v in pts) == [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]
    assert enumerate_points(Basis.identity(2), BallSpec(F(1, 2), 1, (F(1, 2), F(1, 2)))) == []
    # Columns (1,0) and (1,2); the sup-norm ball of radius 2 holds the 15
    # points with second coordinate in {-2, 0, 2} and first in [-2, 2].
    assert count_points(UPPER, BallSpec(2, "inf")) == 15


def test_enumeration_order_is_lexicographic():
    coeffs = [v.coeffs for v in enumerate_points(Basis.identity(2), BallSpec(2, 1))]
    assert coeffs == sorted(coeffs)


def test_count_examples():
    assert count_points(Basis.identity(2), BallSpec(1, 2)) == 5
    assert count_primitive(Basis.identity(1), BallSpec(3, 1)) == 2
    assert count_primitive(Basis.identity(2), BallSpec(2, 2)) == 8


def test_cell_cap():
    with pytest.raises(EnumerationBudgetExceeded):
        count_points(Basis.identity(3), BallSpec(50, 2), cell_cap=1000)


def test_primitive_part_examples():
    B = Basis.identity(3)
    assert primitive_part(LatticeVector(Basis.identity(2), (2, 4))) == (LatticeVector(Basis.identity(2), (1, 2)), 2)
    assert primitive_part(LatticeVector(Basis.identity(2), (3, 5)))[1] == 1
    w, k = primitive_part(LatticeVector(B, (-6, 9, 15)))
    assert (w.coeffs, k) == ((-2, 3, 5), 3)
    with pytest.raises(ZeroVector):
        primitive_part(B.zero())


def test_project_orthogonal_examples():
    P = project_orthogonal(Basis.identity(2), (1, 0))
    assert P.n == 1 and set(P.columns[0]) == {0, 1} and P.columns[0][1] in (1, -1)
    P = project_orthogonal(Basis.identity(2), (1, 1))
    assert P.n == 1 and tuple(abs(x) for x in P.columns[0]) == (F(1, 2), F(1, 2))
    assert P.columns[0][0] == -P.columns[0][1]
    P = project_orthogonal(Basis.identity(3), (0, 0, 1))
    assert P.n == 2 and all(c[2] == 0 for c in P.columns)
    top = [[c[i] for c in P.columns] for i in range(2)]
    assert abs(top[0][0] * top[1][1] - top[0][1] * top[1][0]) == 1
    with pytest.raises(RankOne):
        project_orthogonal(Basis.identity(1), (1,))
    with pytest.raises(ZeroVector):
        project_orthogonal(Basis.identity(2), (0, 0))


def test_membership_and_coords():
    assert UPPER.coords((2, 2)) == (1, 1)
    assert UPPER.coords((0, 1)) is None
    assert not UPPER.contains((0, 1))
    assert Basis.from_rows([[2]]).is_sublattice_of(Basis.identity(1))


small_ints = st.integers(-6, 6)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=9), min_size=1, max_size=5))
def test_norm_comparisons(v):
    m = len(v)
    for p, q in ((1, 2), (2, "inf"), (1, "inf")):
        np_, nq = lp_norm(v, p), lp_norm(v, q)
        kappa = m ** (1 / p - (0 if q == "inf" else 1 / q))
        assert nq <= np_ * (1 + 1e-12)
        assert np_ <= kappa * nq * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(small_ints, min_size=4, max_size=4), st.sampled_from(["1", "2", "inf", "1.5"]))
def test_enumeration_symmetric_and_monotone(entries, p):
    a, b, c, d = entries
    if a * d - b * c == 0:
        return
    B = Basis.from_rows([[a, b], [c, d]])
    pts = {v.coeffs for v in enumerate_points(B, BallSpec(4, p))}
    assert pts == {tuple(-x for x in c) for c in pts}
    counts = [count_points(B, BallSpec(r, p)) for r in (0, 1, 2.5, 4)]
    assert counts == sorted(counts)
    assert counts[-1] == len(pts)

import math
from fractions import Fraction

import numpy as np
import pytest

from lpreduce.analysis import (
    FAMILIES,
    bit_length,
    certified_mass,
    counting_check,
    covering_bound,
    covering_check,
    growth_bound,
    growth_ladder,
    multiples_check,
    point_count_check,
    projection_check,
    shifted_mass_check,
    tail_check,
    theta_1_closed_form,
    theta_p,
    verify_inequality,
)
from lpreduce.core import Basis, LatticeVector

F = Fraction


def test_theta_examples():
    assert theta_p(math.log(2), 1) == pytest.approx(3, abs=1e-12)
    assert theta_p(60, 1.5) == pytest.approx(1, abs=1e-12)
    assert theta_p(1, 2) == pytest.approx(1.7726372048, abs=1e-9)
    for tau in (0.3, 1.0, 2.5):
        assert theta_p(tau, 1) == pytest.approx(theta_1_closed_form(tau), rel=1e-12)


def test_covering_examples():
    rng = np.random.default_rng(0)
    rep = covering_check(1, 1, 2, 3, 200, rng)
    assert rep.details["center_count"] == 1 and rep.holds
    rep = covering_check(4, 1, 2, math.e, 2000, rng)
    assert rep.holds and rep.details["center_count"] <= covering_bound(4, 1, math.e)
    with pytest.raises(ValueError):
        covering_check(2, 2, 1, 3, 10, rng)


def test_growth_examples():
    c_dagger, ratio = growth_ladder(Basis.identity(1), "inf", 1, 4)
    assert c_dagger == 3 and ratio == pytest.approx(7 / 5)
    c_dagger, ratio = growth_ladder(Basis.from_rows([[2, 1], [0, 3]]), 2, 1, 2)
    assert c_dagger == 2 and ratio <= 5**2
    _, ratio = growth_ladder(Basis.identity(2), 2, 1, 6)
    assert ratio <= growth_bound(2, 6)


def test_counting_check():
    rep = counting_check(Basis.from_rows([[2, 1], [1, -3]]), 1, 1.5, 3)
    assert rep.holds and rep.lhs >= 1


def test_verify_inequality_examples():
    rep = verify_inequality("shifted_mass", {"basis": Basis.identity(1), "p": 2, "t": [0]})
    assert rep.holds and rep.lhs == pytest.approx(rep.rhs, rel=1e-9)
    rep = verify_inequality("projection", {"basis": Basis.identity(2), "x": [1, 1]})
    assert rep.holds
    assert rep.rhs == pytest.approx(math.sqrt(2) / 2) and rep.lhs == pytest.approx(0.75 / math.sqrt(2))
    B = Basis.identity(1)
    S = [[c] for c in (-3, -2, -1, 1, 2, 3)]
    rep = verify_inequality("multiples_bound", {"basis": B, "p": 1, "r": 3, "S": S})
    assert rep.holds and rep.lhs == 2 and rep.rhs == 2
    rep = verify_inequality("point_count_bound", {"basis": B, "p": 2, "r": 3, "t": [F(1, 2)]})
    assert rep.holds and rep.details["count"] == 6
    rep = verify_inequality("tail", {"basis": Basis.identity(2), "p": 1.5, "a": 1.5})
    assert rep.holds
    with pytest.raises(ValueError):
        verify_inequality("nonsense", {"basis": B})
    assert len(FAMILIES) == 5


def test_multiples_rejects_vectors_outside_ball():
    B = Basis.identity(1)
    with pytest.raises(ValueError):
        multiples_check(B, 1, 1, [LatticeVector(B, (2,))])


def test_certified_mass_brackets_theta():
    m = certified_mass(Basis.identity(1), 2)
    theta = 1 + 2 * sum(math.exp(-k * k) for k in range(1, 12))
    assert m.lower <= theta <= m.upper
    assert m.rel_width < 1e-9


def test_certified_coset_mass_shift_half():
    # f_2(Z + 1/2) = 2 sum_{k >= 0} exp(-(k + 1/2)^2)
    exact = 2 * sum(math.exp(-((k + 0.5) ** 2)) for k in range(12))
    m = certified_mass(Basis.identity(1), 2, (F(1, 2),))
    assert m.lower <= exact * (1 + 1e-12) and exact <= m.upper * (1 + 1e-12)


def test_shifted_and_tail_on_skew_lattice():
    B = Basis.from_rows([[2, 1, 0], [1, -2, 1], [0, 1, 3]])
    for p in (1, 1.5, 2):
        assert tail_check(B, p, 1.2).holds
        rep = shifted_mass_check(B, (F(1, 3), F(-1, 2), F(2, 7)), p)
        assert rep.holds and rep.details["lower_holds"]


def test_projection_default_vector():
    rep = projection_check(Basis.from_rows([[3, 1, 0], [0, 2, 1], [1, 0, 2]]))
    assert rep.holds


def test_point_count_log_scale():
    B = Basis.from_rows([[7, 1], [0, 5]])
    rep = point_count_check(B, (0, 0), 1, 10)
    assert rep.holds and rep.details["exponent"] == 4 * 2 * bit_length(B)

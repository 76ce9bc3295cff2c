"""Exact and adversarial oracles for SVP, uSVP, CVP and BDD in l_p norms.

Every oracle is a small callable object. Reductions only ever see the call
interface, so an exact backend, an uncooperative adversarial backend and a
promise-checking strict backend are interchangeable. Each oracle owns an
``OracleStats`` record that logs every query for later structural audits.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import (
    Basis,
    CvpInstance,
    LatticeVector,
    PNorm,
    PointSet,
    as_rational_vector,
    scan_ball,
)
from .errors import PromiseViolated, RankOne


@dataclass(frozen=True)
class OracleAnswer:
    vector: LatticeVector
    kind: str
    claimed_factor: float


@dataclass
class OracleStats:
    """Per-oracle query log.

    When a parent lattice is registered, every queried basis is checked to be
    a sublattice of it; ``sublattice_only`` stays True only if all were.
    """

    calls: Counter = field(default_factory=Counter)
    max_rank_queried: int = 0
    max_dim_queried: int = 0
    shapes: set = field(default_factory=set)
    sublattice_only: bool = True
    parent: Basis | None = None

    def register_parent(self, parent: Basis) -> None:
        self.parent = parent

    def record(self, kind: str, basis: Basis) -> None:
        self.calls[kind] += 1
        self.max_rank_queried = max(self.max_rank_queried, basis.n)
        self.max_dim_queried = max(self.max_dim_queried, basis.m)
        self.shapes.add((basis.n, basis.m))
        if self.parent is not None and self.sublattice_only:
            if basis != self.parent and not basis.is_sublattice_of(self.parent):
                self.sublattice_only = False

    @property
    def total_calls(self) -> int:
        return sum(self.calls.values())

    def merge(self, other: "OracleStats") -> "OracleStats":
        out = OracleStats(
            calls=self.calls + other.calls,
            max_rank_queried=max(self.max_rank_queried, other.max_rank_queried),
            max_dim_queried=max(self.max_dim_queried, other.max_dim_queried),
            shapes=self.shapes | other.shapes,
            sublattice_only=self.sublattice_only and other.sublattice_only,
            parent=self.parent if self.parent is not None else other.parent,
        )
        return out

    def as_dict(self) -> dict:
        return {
            "calls": dict(sorted(self.calls.items())),
            "max_rank_queried": self.max_rank_queried,
            "max_dim_queried": self.max_dim_queried,
            "shapes": sorted(list(s) for s in self.shapes),
            "sublattice_only": self.sublattice_only,
        }


# ---------------------------------------------------------------------------
# Exact solvers
# ---------------------------------------------------------------------------


def _reduced_row_keys(basis: Basis, norm: PNorm) -> list:
    red, _ = basis.reduced
    d = basis.denominator
    return sorted(norm.key([Fraction(int(x), d) for x in row]) for row in red)


def _first_positive_lexmin(ps: PointSet, idx: np.ndarray) -> LatticeVector:
    # ps rows are sorted lexicographically, so the first hit is the least one.
    for i in idx:
        row = ps.coeffs[i]
        lead = next(int(c) for c in row if c != 0)
        if lead > 0:
            return LatticeVector(ps.basis, tuple(int(c) for c in row))
    raise AssertionError("minimizers are closed under negation")


@lru_cache(maxsize=8192)
def _shortest(basis: Basis, norm: PNorm) -> tuple[LatticeVector, object]:
    k0 = _reduced_row_keys(basis, norm)[0]
    ps = None
    for frac in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
        ps = scan_ball(basis, norm, norm.scale_key(k0, frac), exclude_zero=True)
        if len(ps):
            break
    v = _first_positive_lexmin(ps, ps.min_indices())
    return v, v.key(norm)


def lambda1_key(basis: Basis, norm) -> Fraction | float:
    """Key (see ``PNorm.key``) of a shortest nonzero lattice vector."""
    return _shortest(basis, PNorm.parse(norm))[1]


def exact_svp(basis: Basis, norm) -> tuple[LatticeVector, float]:
    """A shortest nonzero vector and lambda_1.

    Ties are broken towards the lexicographically least coefficient vector
    whose first nonzero entry is positive.
    """
    norm = PNorm.parse(norm)
    v, k = _shortest(basis, norm)
    return v, norm.key_to_value(k)


def lambda1(basis: Basis, norm) -> float:
    return exact_svp(basis, norm)[1]


def _babai_key(basis: Basis, norm: PNorm, target) -> object:
    red, _ = basis.reduced
    pinv, _ = basis._box_data
    c = np.rint(pinv @ np.array([float(x) for x in target]))
    d = basis.denominator
    point = [
        Fraction(int(sum(int(ci) * int(red[j][i]) for j, ci in enumerate(c))), d)
        for i in range(basis.m)
    ]
    return norm.key([a - b for a, b in zip(point, target)])


@lru_cache(maxsize=8192)
def _closest(basis: Basis, norm: PNorm, target: tuple) -> tuple[LatticeVector, object]:
    coeffs = basis.coords(target)
    if coeffs is not None:
        return LatticeVector(basis, coeffs), norm.key([0])
    k0 = _babai_key(basis, norm, target)
    ps = None
    for frac in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
        ps = scan_ball(basis, norm, norm.scale_key(k0, frac), center=target)
        if len(ps):
            break
    # Among closest vectors prefer the shortest one, then the lexicographically
    # least coefficients (rows are already in lexicographic order).
    best = None
    for i in ps.min_indices():
        cand = LatticeVector(basis, tuple(int(c) for c in ps.coeffs[i]))
        k = cand.key(norm)
        if best is None or (k < best[1] and not norm.keys_tied(k, best[1])):
            best = (cand, k)
    v = best[0]
    return v, norm.key([a - b for a, b in zip(v.embedding, target)])


def distance_key(inst: CvpInstance) -> Fraction | float:
    return _closest(inst.basis, inst.norm, inst.target)[1]


def exact_cvp(inst: CvpInstance) -> tuple[LatticeVector, float]:
    """A closest lattice vector to the target and the distance.

    Ties are broken towards the shortest closest vector, then towards the
    lexicographically least coefficient vector.
    """
    v, k = _closest(inst.basis, inst.norm, inst.target)
    return v, inst.norm.key_to_value(k)


def _parallel_mask(coeffs: np.ndarray, w: tuple[int, ...]) -> np.ndarray:
    wv = np.array(w, dtype=coeffs.dtype)
    minors = coeffs[:, :, None] * wv[None, None, :] - coeffs[:, None, :] * wv[None, :, None]
    return ~np.any(minors.reshape(len(coeffs), -1) != 0, axis=1)


def lambda2_key(basis: Basis, norm) -> Fraction | float:
    norm = PNorm.parse(norm)
    if basis.n < 2:
        raise RankOne("lambda_2 needs rank at least two")
    v1, _ = _shortest(basis, norm)
    # Two reduced rows are independent, so the larger of the two smallest
    # keys bounds lambda_2 from above.
    rk = _reduced_row_keys(basis, norm)[1]
    ps = scan_ball(basis, norm, rk, exclude_zero=True)
    ps = ps.select(~_parallel_mask(ps.coeffs, v1.coeffs))
    return ps.key(int(ps.min_indices()[0]))


def lambda2(basis: Basis, norm) -> float:
    """Smallest norm of a lattice vector independent of a shortest vector."""
    norm = PNorm.parse(norm)
    return norm.key_to_value(lambda2_key(basis, norm))


def _check_gamma(gamma: float):
    if not gamma >= 1:
        raise ValueError("approximation factor must be at least 1")


# ---------------------------------------------------------------------------
# Oracle objects
# ---------------------------------------------------------------------------


class ExactSVP:
    """Always returns the canonical shortest vector."""

    kind = "SVP"

    def __init__(self):
        self.gamma = 1.0
        self.stats = OracleStats()

    def __call__(self, basis: Basis, norm) -> OracleAnswer:
        norm = PNorm.parse(norm)
        self.stats.record(self.kind, basis)
        v, _ = _shortest(basis, norm)
        return OracleAnswer(v, self.kind, self.gamma)


class AdversarialSVP:
    """A legal gamma-SVP oracle that answers uniformly among all legal vectors."""

    kind = "SVP"

    def __init__(self, gamma: float, rng: np.random.Generator):
        _check_gamma(gamma)
        self.gamma = float(gamma)
        self.rng = rng
        self.stats = OracleStats()

    def legal_answers(self, basis: Basis, norm: PNorm) -> PointSet:
        k1 = _shortest(basis, norm)[1]
        return scan_ball(basis, norm, norm.scale_key(k1, self.gamma), exclude_zero=True)

    def __call__(self, basis: Basis, norm) -> OracleAnswer:
        norm = PNorm.parse(norm)
        self.stats.record(self.kind, basis)
        ps = self.legal_answers(basis, norm)
        i = int(self.rng.integers(len(ps)))
        return OracleAnswer(LatticeVector(basis, tuple(int(c) for c in ps.coeffs[i])), self.kind, self.gamma)


def adversarial_svp(basis: Basis, norm, gamma: float, rng: np.random.Generator) -> OracleAnswer:
    return AdversarialSVP(gamma, rng)(basis, norm)


class UniqueSVP:
    """A gamma-uSVP oracle backed by exact SVP.

    In strict mode the promise ``gamma * lambda_1 < lambda_2`` is verified first
    and ``PromiseViolated`` is raised when it fails. Otherwise the oracle answers
    regardless, as a real oracle may.
    """

    kind = "uSVP"

    def __init__(self, gamma: float, strict: bool = False):
        _check_gamma(gamma)
        self.gamma = float(gamma)
        self.strict = strict
        self.stats = OracleStats()
        self.promise_failures = 0

    def promise_holds(self, basis: Basis, norm: PNorm) -> bool:
        if basis.n < 2:
            return True
        k1 = _shortest(basis, norm)[1]
        k2 = lambda2_key(basis, norm)
        scaled = norm.scale_key(k1, self.gamma)
        if norm.exact:
            return scaled < k2
        return float(scaled) < float(k2) * (1 - norm.key_rtol())

    def __call__(self, basis: Basis, norm) -> OracleAnswer:
        norm = PNorm.parse(norm)
        self.stats.record(self.kind, basis)
        if self.strict and not self.promise_holds(basis, norm):
            self.promise_failures += 1
            raise PromiseViolated("gamma * lambda_1 >= lambda_2")
        v, _ = _shortest(basis, norm)
        return OracleAnswer(v, self.kind, self.gamma)


def usvp_oracle(basis: Basis, norm, gamma: float, strict: bool = False) -> OracleAnswer:
    return UniqueSVP(gamma, strict)(basis, norm)


class ExactCVP:
    kind = "CVP"

    def __init__(self):
        self.gamma = 1.0
        self.stats = OracleStats()

    def __call__(self, inst: CvpInstance) -> OracleAnswer:
        self.stats.record(self.kind, inst.basis)
        v, _ = _closest(inst.basis, inst.norm, inst.target)
        return OracleAnswer(v, self.kind, self.gamma)


class AdversarialCVP:
    """A legal gamma-CVP oracle answering uniformly within gamma * dist."""

    kind = "CVP"

    def __init__(self, gamma: float, rng: np.random.Generator):
        _check_gamma(gamma)
        self.gamma = float(gamma)
        self.rng = rng
        self.stats = OracleStats()

    def __call__(self, inst: CvpInstance) -> OracleAnswer:
        self.stats.record(self.kind, inst.basis)
        norm = inst.norm
        kd = _closest(inst.basis, norm, inst.target)[1]
        if kd == 0:
            v, _ = _closest(inst.basis, norm, inst.target)
            return OracleAnswer(v, self.kind, self.gamma)
        ps = scan_ball(inst.basis, norm, norm.scale_key(kd, self.gamma), center=inst.target)
        i = int(self.rng.integers(len(ps)))
        return OracleAnswer(LatticeVector(inst.basis, tuple(int(c) for c in ps.coeffs[i])), self.kind, self.gamma)


class BDDOracle:
    """An (alpha, gamma)-BDD oracle backed by exact CVP.

    Strict mode first checks ``dist < alpha * lambda_1``.
    """

    kind = "BDD"

    def __init__(self, alpha: float, gamma: float = 1.0, strict: bool = False):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        _check_gamma(gamma)
        self.alpha = alpha
        self.gamma = float(gamma)
        self.strict = strict
        self.stats = OracleStats()
        self.promise_failures = 0

    def promise_holds(self, inst: CvpInstance) -> bool:
        norm = inst.norm
        kd = _closest(inst.basis, norm, inst.target)[1]
        bound = norm.scale_key(_shortest(inst.basis, norm)[1], self.alpha)
        if norm.exact:
            return kd < bound
        return float(kd) < float(bound) * (1 - norm.key_rtol())

    def __call__(self, inst: CvpInstance) -> OracleAnswer:
        self.stats.record(self.kind, inst.basis)
        if self.strict and not self.promise_holds(inst):
            self.promise_failures += 1
            raise PromiseViolated("dist >= alpha * lambda_1")
        v, _ = _closest(inst.basis, inst.norm, inst.target)
        return OracleAnswer(v, self.kind, self.gamma)


def bdd_oracle(inst: CvpInstance, alpha: float, gamma: float = 1.0, strict: bool = False) -> OracleAnswer:
    return BDDOracle(alpha, gamma, strict)(inst)


def make_instance(basis: Basis, target, norm) -> CvpInstance:
    return CvpInstance(basis, as_rational_vector(target), PNorm.parse(norm))

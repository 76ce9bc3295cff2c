"""Executable checks of the geometric and probabilistic lemmas behind the reductions.

Every check computes both sides of its inequality and returns a
``LemmaReport``. Lattice masses are certified with a tail bound derived from
point counting (not from the supergaussian tail inequality), so the tail and
sandwich checks do not rely on the statements they test.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    Basis,
    LatticeVector,
    PNorm,
    as_rational_vector,
    count_in_ball,
    primitive_part,
    project_orthogonal,
    scan_ball,
)
from .oracles import lambda1_key
from .supergaussian import ContinuousSupergaussian, one_d_mass

EXACT = "exact-enumeration"


@dataclass
class LemmaReport:
    """Outcome of one inequality check; ``holds`` is ``lhs <= rhs``."""

    lemma: str
    instance: str
    lhs: float
    rhs: float
    holds: bool
    method: str = EXACT
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# One-dimensional theta series
# ---------------------------------------------------------------------------


def theta_p(tau: float, p: float) -> float:
    """``sum_{z in Z} exp(-tau |z|^p)``, summed until the terms underflow."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    norm = PNorm.parse(p)
    if norm.is_inf:
        raise ValueError("p must be finite")
    if math.isinf(tau):
        return 1.0
    return 1.0 + one_d_mass(tau ** (1.0 / norm.p), norm.p)


def theta_1_closed_form(tau: float) -> float:
    """``1 + 2 e^{-tau} / (1 - e^{-tau})``."""
    return 1.0 + 2.0 * math.exp(-tau) / -math.expm1(-tau)


# ---------------------------------------------------------------------------
# Covering by l_q balls
# ---------------------------------------------------------------------------


def covering_bound(m: int, p: float, alpha: float) -> float:
    """``(e^4 alpha^p)^{m / alpha^p}``."""
    return (math.exp(4) * alpha**p) ** (m / alpha**p)


def uniform_in_ball(m: int, p: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from the unit l_p ball (radial scaling of a product density)."""
    g = ContinuousSupergaussian(PNorm.parse(p), m).sample(rng, size)
    norms = np.sum(np.abs(g) ** p, axis=1) ** (1.0 / p)
    radii = rng.random(size) ** (1.0 / m)
    return g * (radii / norms)[:, None]


COVERING_GRID = tuple(
    {"m": m, "p": p, "q": q, "alpha": a}
    for m in (2, 3, 4)
    for p, q in ((1, 2), (2, 4), (1, "inf"), (2, "inf"))
    for a in (math.e, 4.0)
)


def covering_check(m: int, p: float, q, alpha: float, n_samples: int, rng: np.random.Generator) -> LemmaReport:
    """Check the cover of ``r B_p`` (``r = m^{1/p}/alpha``) by ``m^{1/q} B_q`` balls centered on ``Z^m``.

    The center set is ``S = Z^m cap r B_p``. Its size is compared with the
    bound, and sampled points (a tenth of them pushed to the boundary) are
    rounded towards zero, which must land in S within l_q distance ``m^{1/q}``.
    """
    if alpha < math.e:
        raise ValueError("alpha must be at least e")
    pn, qn = PNorm.parse(p), PNorm.parse(q)
    if pn.is_inf or (not qn.is_inf and qn.p < pn.p):
        raise ValueError("need 1 <= p <= q with p finite")
    r = m ** (1.0 / pn.p) / alpha
    size = count_in_ball(Basis.identity(m), pn, pn.value_to_key(r))
    bound = covering_bound(m, pn.p, alpha)
    pts = uniform_in_ball(m, pn.p, n_samples, rng) * r
    nb = n_samples // 10
    if nb:
        edge = pts[:nb]
        pts[:nb] = edge * (r / np.sum(np.abs(edge) ** pn.p, axis=1) ** (1 / pn.p))[:, None]
    centers = np.trunc(pts)
    in_s = np.sum(np.abs(centers) ** pn.p, axis=1) <= r**pn.p * (1 + 1e-12)
    diff = np.abs(centers - pts)
    dq = diff.max(axis=1) if qn.is_inf else np.sum(diff**qn.p, axis=1) ** (1 / qn.p)
    reach = 1.0 if qn.is_inf else m ** (1 / qn.p)
    uncovered = int(np.count_nonzero(~in_s | (dq > reach * (1 + 1e-12))))
    return LemmaReport(
        lemma="covering",
        instance=f"m={m} p={pn} q={qn} alpha={alpha:.6g}",
        lhs=float(size),
        rhs=bound,
        holds=size <= bound and uncovered == 0,
        method=f"{EXACT} + monte-carlo({n_samples})",
        details={"center_count": size, "uncovered": uncovered, "samples": n_samples},
    )


# ---------------------------------------------------------------------------
# Point counting and the radius ladder
# ---------------------------------------------------------------------------


def counting_check(basis: Basis, p, r: float, R: float) -> LemmaReport:
    """``|L cap R K| <= (1 + 2R/r)^n |L cap r K|`` with K the unit l_p ball."""
    norm = PNorm.parse(p)
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    small = count_in_ball(basis, norm, norm.value_to_key(r))
    big = count_in_ball(basis, norm, norm.value_to_key(R))
    rhs = (1 + 2 * R / r) ** basis.n * small
    return LemmaReport("counting", f"n={basis.n} p={norm} r={r:.6g} R={R:.6g}", float(big), rhs, big <= rhs)


def growth_ladder(basis: Basis, p, r: float, c: float) -> tuple[float, float]:
    """``(c_dagger, ratio)`` for the least ladder step whose growth ratio meets ``5^{m / floor(c/2)}``.

    Counts ``N_i = |L cap (c' + i) r K|`` with ``c' = c - floor(c/2)`` and
    returns ``c_dagger = c' + j`` for the least ``j`` with
    ``N_j / N_{j-1} <= 5^{m / floor(c/2)}``.
    """
    if c < 2:
        raise ValueError("c must be at least 2")
    norm = PNorm.parse(p)
    half = math.floor(c / 2)
    c0 = c - half
    bound = 5 ** (basis.m / half)
    counts = [count_in_ball(basis, norm, norm.value_to_key((c0 + i) * r)) for i in range(half + 1)]
    for j in range(1, half + 1):
        ratio = counts[j] / counts[j - 1]
        if ratio <= bound:
            return c0 + j, ratio
    raise AssertionError("the pigeonhole argument guarantees a qualifying step")


def growth_bound(m: int, c: float) -> float:
    """``2^{(log_2 5 / floor(c/2)) m}``."""
    return 2 ** (math.log2(5) / math.floor(c / 2) * m)


# ---------------------------------------------------------------------------
# Certified supergaussian masses
# ---------------------------------------------------------------------------


@dataclass
class CertifiedMass:
    lower: float
    upper: float
    radius: float
    points: int

    @property
    def rel_width(self) -> float:
        return (self.upper - self.lower) / self.lower


def _fp_sum(ps, norm: PNorm) -> float:
    vals = np.asarray(ps.keys, dtype=float)
    if norm.exact:
        vals = vals / float(ps.key_den)
    return math.fsum(np.exp(-vals).tolist())


def certified_mass(basis: Basis, p, t=None, rel_width: float = 1e-10) -> CertifiedMass:
    """Enclosure of ``f_p(L + t)`` by a ball sum plus a shell-count tail bound.

    Beyond radius R the shell ``R + k < ||x|| <= R + k + 1`` holds at most
    ``N(R + k + 1)`` points of ``L + t``. For a coset ``N(rho) <= |L cap 2 rho K|``
    (differences of coset points), and ``|L cap s K| <= (1 + 2 s/R)^n |L cap R K|``
    bounds every lattice count by the enumerated one.
    """
    norm = PNorm.parse(p)
    if norm.is_inf:
        raise ValueError("p must be finite")
    tv = None if t is None else as_rational_vector(t)
    shifted = tv is not None and any(tv)
    center = tuple(-x for x in tv) if shifted else None
    n = basis.n
    Rp = math.log(1 / rel_width) + 4 * n + 10
    while True:
        R = Rp ** (1 / norm.p)
        rkey = norm.value_to_key(R)
        inner_ps = scan_ball(basis, norm, rkey, center=center)
        inner = _fp_sum(inner_ps, norm)
        base = count_in_ball(basis, norm, rkey)
        tail = 0.0
        k = 0
        while True:
            rho = R + k + 1
            s = 2 * rho if shifted else rho
            cnt = (1 + 2 * s / R) ** n * base
            term = cnt * math.exp(-((R + k) ** norm.p))
            tail += term
            if term < 1e-30 * max(inner, 1e-300) and k > 2:
                break
            k += 1
        if inner > 0 and tail <= rel_width * inner:
            return CertifiedMass(inner, inner + tail, R, len(inner_ps))
        Rp += 5


def f_p_value(x, p) -> float:
    norm = PNorm.parse(p)
    return math.exp(-norm.key_to_value(norm.key(x)) ** norm.p)


def tail_check(basis: Basis, p, a: float) -> LemmaReport:
    """Mass beyond ``a (m/p)^{1/p}`` against ``(e a^p e^{-a^p})^{m/p} f_p(L)``."""
    norm = PNorm.parse(p)
    if not (0 < norm.p <= 2) or a < 1:
        raise ValueError("need 0 < p <= 2 and a >= 1")
    m = basis.m
    thr = a * (m / norm.p) ** (1 / norm.p)
    total = certified_mass(basis, norm)
    ps = scan_ball(basis, norm, norm.value_to_key(thr))
    vals = ps.float_values()
    below = math.fsum(np.exp(-(vals[vals < thr] ** norm.p)).tolist())
    lhs = total.upper - below
    factor = (math.e * a**norm.p * math.exp(-(a**norm.p))) ** (m / norm.p)
    rhs = factor * total.lower
    return LemmaReport(
        "tail",
        f"n={basis.n} m={m} p={norm} a={a:.6g}",
        lhs,
        rhs,
        lhs <= rhs,
        details={"mass_lower": total.lower, "mass_upper": total.upper, "rel_width": total.rel_width},
    )


def shifted_mass_check(basis: Basis, t, p) -> LemmaReport:
    """``f_p(t) f_p(L) <= f_p(L + t) <= f_p(L)``; lhs/rhs describe the upper inequality."""
    norm = PNorm.parse(p)
    lat = certified_mass(basis, norm)
    cos = certified_mass(basis, norm, t)
    ft = f_p_value(as_rational_vector(t), norm)
    tv = as_rational_vector(t)
    if not any(tv) or basis.contains(tv):
        # The coset is the lattice itself; both enclosures cover one number.
        upper_ok = True
        lower_ok = ft * lat.lower <= cos.upper
    else:
        upper_ok = cos.lower <= lat.upper
        lower_ok = ft * lat.upper <= cos.lower
    return LemmaReport(
        "shifted_mass",
        f"n={basis.n} p={norm} t={[str(x) for x in tv]}",
        cos.lower,
        lat.upper,
        upper_ok and lower_ok,
        details={
            "lower_bound": ft * lat.upper,
            "coset_mass": [cos.lower, cos.upper],
            "lattice_mass": [lat.lower, lat.upper],
            "lower_holds": lower_ok,
            "upper_holds": upper_ok,
        },
    )


# ---------------------------------------------------------------------------
# Projection, multiples and crude point counts
# ---------------------------------------------------------------------------


def projection_check(basis: Basis, x: LatticeVector | None = None) -> LemmaReport:
    """``lambda_1(pi(L)) >= (3/4) lambda_1(L)^2 / ||x||_2`` for x in L (default: first basis vector)."""
    two = PNorm.parse(2)
    if x is None:
        x = LatticeVector(basis, (1,) + (0,) * (basis.n - 1))
    if x.is_zero:
        raise ValueError("x must be nonzero")
    proj = project_orthogonal(basis, x)
    l1 = lambda1_key(basis, two)
    lp = lambda1_key(proj, two)
    xx = x.key(two)
    lhs_sq = Fraction(9, 16) * l1 * l1 / xx
    return LemmaReport(
        "projection",
        f"n={basis.n} x={list(x.coeffs)}",
        math.sqrt(lhs_sq),
        math.sqrt(lp),
        lhs_sq <= lp,
    )


def multiples_check(basis: Basis, p, r: float, S: list[LatticeVector] | None = None) -> LemmaReport:
    """``|S'| >= (lambda_1 / r) |S|`` where S' collects primitive vectors with a positive multiple in S."""
    norm = PNorm.parse(p)
    if S is None:
        S = scan_ball(basis, norm, norm.value_to_key(r), exclude_zero=True).vectors()
    rkey = norm.value_to_key(r)
    for v in S:
        if v.is_zero or not norm.key_le(v.key(norm), rkey):
            raise ValueError("S must consist of nonzero vectors in the r-ball")
    prims = {primitive_part(v)[0].coeffs for v in S}
    l1 = norm.key_to_value(lambda1_key(basis, norm))
    lhs = l1 / r * len(S)
    if norm.exact:
        power = 2 if norm.p == 2 else 1
        holds = lambda1_key(basis, norm) * len(S) ** power <= Fraction(rkey) * len(prims) ** power
    else:
        holds = lhs <= len(prims) * (1 + 1e-9)
    return LemmaReport("multiples_bound", f"n={basis.n} p={norm} r={r:.6g} |S|={len(S)}", lhs, float(len(prims)), holds)


POINT_COUNT_EXPONENT = 4  # (2 + r)^{4 m l}: a fixed stand-in for an unspecified polynomial


def bit_length(basis: Basis) -> int:
    """Largest bit length of a basis entry written as numerator and denominator."""
    d = basis.denominator
    best = 1
    for row in basis.entries:
        for e in row:
            f = Fraction(e, d)
            best = max(best, abs(f.numerator).bit_length() + f.denominator.bit_length())
    return best


def point_count_check(basis: Basis, t, p, r: float) -> LemmaReport:
    """``|(L - t) cap r B_p| <= 1 + (2 + r)^{4 m l}``, compared on a log scale."""
    norm = PNorm.parse(p)
    tv = as_rational_vector(t)
    count = count_in_ball(basis, norm, norm.value_to_key(r), center=tv)
    expo = POINT_COUNT_EXPONENT * basis.m * bit_length(basis)
    log_rhs = expo * math.log(2 + r)
    log_rhs = log_rhs + math.log1p(math.exp(-log_rhs))
    lhs = math.log(count) if count else -math.inf
    return LemmaReport(
        "point_count_bound",
        f"n={basis.n} p={norm} r={r:.6g}",
        lhs,
        log_rhs,
        lhs <= log_rhs,
        method=f"{EXACT} (log scale)",
        details={"count": count, "exponent": expo},
    )


FAMILIES = ("tail", "shifted_mass", "projection", "multiples_bound", "point_count_bound")


def verify_inequality(which: str, instance: dict) -> LemmaReport:
    """Dispatch one of the five inequality families on an instance dict.

    Keys: ``basis`` always; ``p`` for all but projection; ``a`` (tail); ``t``
    (shifted_mass, point_count_bound); ``x`` coefficients (projection);
    ``r`` and optional ``S`` coefficient lists (multiples_bound, point_count_bound).
    """
    B = instance["basis"]
    if which == "tail":
        return tail_check(B, instance["p"], instance.get("a", 1.0))
    if which == "shifted_mass":
        return shifted_mass_check(B, instance["t"], instance["p"])
    if which == "projection":
        x = instance.get("x")
        return projection_check(B, None if x is None else LatticeVector(B, tuple(x)))
    if which == "multiples_bound":
        S = instance.get("S")
        vecs = None if S is None else [LatticeVector(B, tuple(c)) for c in S]
        return multiples_check(B, instance["p"], instance["r"], vecs)
    if which == "point_count_bound":
        return point_count_check(B, instance.get("t", [0] * B.m), instance["p"], instance["r"])
    raise ValueError(f"unknown inequality family {which!r}")

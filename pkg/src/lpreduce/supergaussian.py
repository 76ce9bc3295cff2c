"""Supergaussian masses and samplers.

``f_p(x) = exp(-||x||_p^p)``. Lattice masses are returned as certified
enclosures: the partial sum over a truncation ball plus a rigorous bound on
the mass outside it, taken from the tail inequality
``sum_{||x|| >= a (m/p)^{1/p}} f_p(x) <= (e a^p e^{-a^p})^{m/p} f_p(L)``.

Every key produced by ``PNorm.key`` for finite p equals ``||x||_p^p`` up to
the exact representation, so ``f_p(x) = exp(-key)`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

from .core import (
    Basis,
    LatticeVector,
    PNorm,
    as_rational_vector,
    basis_from_generators,
    primitive_mask,
    scan_ball,
)
from .errors import InfinityNorm
from .oracles import ExactSVP
from .sparsify import next_prime, uniform_primitive_sample


def _finite(p) -> PNorm:
    norm = PNorm.parse(p)
    if norm.is_inf:
        raise InfinityNorm("f_p is undefined for p = inf")
    return norm


def f_p_point(x, p) -> float:
    """``exp(-||x||_p^p)``."""
    norm = _finite(p)
    return math.exp(-float(norm.key(x)))


# ---------------------------------------------------------------------------
# Certified lattice masses
# ---------------------------------------------------------------------------


def tail_fraction(a: float, m: int, p: float) -> float:
    """``(e a^p e^{-a^p})^{m/p}``, the tail weight beyond ``a (m/p)^{1/p}``."""
    ap = a**p
    return math.exp((m / p) * (1.0 + math.log(ap) - ap))


def tail_parameter(m: int, p: float, rel_err: float, a_min: float = 1.0) -> float:
    """Smallest ``a >= a_min`` whose tail weight is at most ``rel_err``."""
    if not 0 < rel_err < 1:
        raise ValueError("rel_err must lie in (0, 1)")
    if tail_fraction(a_min, m, p) <= rel_err:
        return a_min
    hi = max(2.0, a_min)
    while tail_fraction(hi, m, p) > rel_err:
        hi *= 2
    return brentq(lambda a: tail_fraction(a, m, p) - rel_err, max(1.0, a_min), hi, xtol=1e-12) * (1 + 1e-9)


@dataclass(frozen=True)
class MassAccumulator:
    """Partial mass over a truncation ball plus a certified bound on the rest.

    The true mass lies in ``[value, value + tail_bound]``.
    """

    value: float
    truncation_radius: float
    tail_bound: float
    points: int = 0

    @property
    def lower(self) -> float:
        return self.value

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound

    @property
    def rel_width(self) -> float:
        return self.tail_bound / self.value if self.value else math.inf


def _radius_key(norm: PNorm, radius: float):
    return norm.value_to_key(radius)


def _mass_from_keys(keys: np.ndarray, key_den: int, norm: PNorm) -> float:
    vals = np.asarray(keys, dtype=float)
    if norm.exact:
        vals = vals / float(key_den)
    return math.fsum(np.exp(-vals).tolist())


def truncation_radius(m: int, p: float, rel_err: float) -> tuple[float, float]:
    """Radius ``a (m/p)^{1/p}`` (at least ``m^{1/p}``) and its tail weight."""
    a = tail_parameter(m, p, rel_err, a_min=p ** (1.0 / p))
    return a * (m / p) ** (1.0 / p), tail_fraction(a, m, p)


def f_p_lattice(basis: Basis, p, rel_err: float = 1e-10, *, cell_cap: int | None = None) -> MassAccumulator:
    """Certified enclosure of ``f_p(L)``."""
    norm = _finite(p)
    if not 0 < rel_err < 0.5:
        raise ValueError("rel_err must lie in (0, 1/2)")
    radius, frac = truncation_radius(basis.m, norm.p, rel_err)
    ps = scan_ball(basis, norm, _radius_key(norm, radius), cell_cap=cell_cap)
    value = _mass_from_keys(ps.keys, ps.key_den, norm)
    return MassAccumulator(value, radius, value * frac / (1 - frac), len(ps))


def coset_mass(basis: Basis, t, p, rel_err: float = 1e-10, *, cell_cap: int | None = None) -> MassAccumulator:
    """Certified enclosure of ``f_p(L + t)`` for a rational shift t.

    The tail of ``L + t`` sits inside the tail of the lattice generated by L
    and t, whose mass is itself bounded by a certified enclosure.
    """
    norm = _finite(p)
    tv = as_rational_vector(t)
    radius, frac = truncation_radius(basis.m, norm.p, rel_err)
    rkey = _radius_key(norm, radius)
    ps = scan_ball(basis, norm, rkey, center=tuple(-x for x in tv), cell_cap=cell_cap)
    value = _mass_from_keys(ps.keys, ps.key_den, norm)
    if not any(tv) or basis.contains(tv):
        return MassAccumulator(value, radius, value * frac / (1 - frac), len(ps))
    joined = basis_from_generators([*basis.columns, tv])
    big = scan_ball(joined, norm, rkey, cell_cap=cell_cap)
    big_value = _mass_from_keys(big.keys, big.key_den, norm)
    return MassAccumulator(value, radius, big_value * frac / (1 - frac), len(ps))


# ---------------------------------------------------------------------------
# One-dimensional multiples
# ---------------------------------------------------------------------------


def _multiple_terms(r: float, p: float) -> np.ndarray:
    """Terms ``exp(-(k r)^p)`` for k = 1..K.

    K is chosen with ``(K r)^p >= 745``, past which every term underflows a
    double and the remaining series is below ``exp(-745) / (1 - exp(-r^p))``.
    """
    kmax = max(1, math.ceil(745.0 ** (1.0 / p) / r))
    k = np.arange(1, kmax + 1, dtype=float)
    return np.exp(-((k * r) ** p))


def one_d_mass(r: float, p) -> float:
    """``f_p(Z_{!=0} r) = 2 sum_{k>=1} exp(-(k r)^p)``."""
    norm = _finite(p)
    if r <= 0:
        raise ValueError("r must be positive")
    return 2.0 * math.fsum(_multiple_terms(float(r), norm.p).tolist())


def one_d_masses(rs: np.ndarray, p: float) -> np.ndarray:
    """Vectorized ``one_d_mass`` over an array of radii."""
    rs = np.asarray(rs, dtype=float)
    if rs.size == 0:
        return rs.copy()
    kmax = max(1, math.ceil(745.0 ** (1.0 / p) / float(rs.min())))
    out = np.zeros_like(rs)
    step = max(1, 4_000_000 // kmax)
    k = np.arange(1, kmax + 1, dtype=float)
    for s in range(0, rs.size, step):
        block = rs[s : s + step, None]
        terms = np.exp(-((k[None, :] * block) ** p))
        # Sum from the small end for accuracy.
        out[s : s + step] = 2.0 * terms[:, ::-1].sum(axis=1)
    return out


def sample_multiple(r: float, p, rng: np.random.Generator) -> int:
    """A nonzero integer z drawn with probability proportional to ``exp(-|z r|^p)``."""
    norm = _finite(p)
    terms = _multiple_terms(float(r), norm.p)
    cdf = np.cumsum(terms)
    u = rng.random() * cdf[-1]
    k = int(np.searchsorted(cdf, u, side="right")) + 1
    k = min(k, len(terms))
    return k if rng.integers(2) else -k


def sample_multiples(r: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Vectorized ``sample_multiple`` for an array of radii."""
    r = np.asarray(r, dtype=float)
    out = np.empty(r.shape, dtype=np.int64)
    for val in np.unique(r):
        idx = np.flatnonzero(r == val)
        terms = _multiple_terms(float(val), p)
        cdf = np.cumsum(terms)
        u = rng.random(idx.size) * cdf[-1]
        k = np.minimum(np.searchsorted(cdf, u, side="right") + 1, len(terms))
        sign = np.where(rng.integers(0, 2, size=idx.size) == 1, 1, -1)
        out[idx] = k * sign
    return out


# ---------------------------------------------------------------------------
# Discrete samplers
# ---------------------------------------------------------------------------


class ExactDSS:
    """Exact sampler for the discrete supergaussian, truncated to a certified ball.

    The truncation ball contains ``m^{1/p} B_p``; every point in it is drawn
    with probability at least ``exp(-delta)`` times its true probability,
    where ``delta = -ln(1 - tail fraction)``.
    """

    def __init__(self, basis: Basis, p, rel_err: float = 1e-6, *, cell_cap: int | None = None):
        self.basis = basis
        self.norm = _finite(p)
        self.radius, self.tail = truncation_radius(basis.m, self.norm.p, rel_err)
        ps = scan_ball(basis, self.norm, _radius_key(self.norm, self.radius), cell_cap=cell_cap)
        self.points = ps
        vals = np.asarray(ps.keys, dtype=float)
        if self.norm.exact:
            vals = vals / float(ps.key_den)
        w = np.exp(-vals)
        self.mass = math.fsum(w.tolist())
        self.cdf = np.cumsum(w) / w.sum()
        self.delta = -math.log1p(-self.tail)

    def sample_coeffs(self, M: int, rng: np.random.Generator) -> np.ndarray:
        idx = np.searchsorted(self.cdf, rng.random(M) * self.cdf[-1], side="right")
        idx = np.minimum(idx, len(self.cdf) - 1)
        return self.points.coeffs[idx]

    def sample(self, M: int, rng: np.random.Generator) -> list[LatticeVector]:
        return [LatticeVector(self.basis, tuple(int(c) for c in row)) for row in self.sample_coeffs(M, rng)]


def dss_exact(basis: Basis, p, M: int, rng: np.random.Generator, rel_err: float = 1e-6) -> list[LatticeVector]:
    """M i.i.d. samples from the discrete supergaussian on the lattice."""
    return ExactDSS(basis, p, rel_err).sample(M, rng)


class SvpDSS:
    """Discrete supergaussian sampling through an SVP oracle and a radius ladder.

    Radii ``r_i = (lambda_1^p + i / (100 m f))^{1/p}`` for ``i = 0..200 m^2 f``.
    ``N_i`` counts primitive vectors of norm at most ``r_i`` up to sign (an
    exact count stands in for an approximate primitive-vector counter). The
    sampler outputs 0 with probability ``1/(1+W)``; otherwise it picks a ladder
    index with probability proportional to ``N_k w_k``, a primitive vector x
    uniformly from the ball of radius ``r_k``, an integer multiple z of x, and
    returns ``z x``.

    ``selector`` picks how x is drawn: ``"enumeration"`` (directly from the
    enumerated list) or ``"sparsification"`` (repeated sparsification trials
    answered by the SVP oracle, retried until one succeeds). The sparsification
    modulus comes from the prescribed window unless ``selection_q_factor`` is
    given, in which case it is the least prime at least that multiple of ``N_k``.
    """

    def __init__(
        self,
        basis: Basis,
        p,
        f: int = 10,
        svp_oracle=None,
        selector: str = "enumeration",
        *,
        cell_cap: int | None = None,
        max_selection_trials: int = 100_000,
        selection_q_factor: float | None = None,
    ):
        self.basis = basis
        self.norm = _finite(p)
        if self.norm.p > 2:
            raise ValueError("supergaussian sampling is restricted to 1 <= p <= 2")
        if f < 1:
            raise ValueError("f must be at least 1")
        if selector not in ("enumeration", "sparsification"):
            raise ValueError(f"unknown selector {selector!r}")
        self.f = int(f)
        self.oracle = svp_oracle if svp_oracle is not None else ExactSVP()
        self.selector = selector
        self.max_selection_trials = max_selection_trials
        self.selection_q_factor = selection_q_factor
        self.delta = 0.5 * math.log1p(1.0 / self.f)
        m = basis.m
        self.m = m
        self.ell = 200 * m * m * self.f
        step_den = 100 * m * self.f

        v1 = self.oracle(basis, self.norm).vector
        lam_key = v1.key(self.norm)
        self.lambda1 = self.norm.key_to_value(lam_key)
        i = np.arange(self.ell + 1)
        if self.norm.exact:
            lam_key = Fraction(lam_key)
            top = lam_key + Fraction(self.ell, step_den)
        else:
            top = float(lam_key) + self.ell / step_den
        ps = scan_ball(basis, self.norm, top, exclude_zero=True, cell_cap=cell_cap)
        ps = ps.select(primitive_mask(ps.coeffs))
        order = np.argsort(ps.keys.astype(float) if ps.keys.dtype == object else ps.keys, kind="stable")
        self.prim = ps.select(order)
        if self.norm.exact:
            den = ps.key_den
            base = lam_key * den  # Fraction
            # floor(base + i * den / step_den) computed exactly
            thr = [
                (base.numerator * step_den + ii * den * base.denominator) // (step_den * base.denominator)
                for ii in range(self.ell + 1)
            ]
            keys_sorted = [int(k) for k in self.prim.keys]
            counts = np.searchsorted(np.array(keys_sorted, dtype=object), np.array(thr, dtype=object), side="right")
            self.ppower = np.array([float(lam_key) + ii / step_den for ii in range(self.ell + 1)])
        else:
            self.ppower = float(lam_key) + i / step_den
            keys_sorted = np.asarray(self.prim.keys, dtype=float)
            counts = np.searchsorted(keys_sorted, self.ppower * (1 + self.norm.key_rtol()), side="right")
        self.signed_counts = np.asarray(counts, dtype=np.int64)
        self.N = self.signed_counts // 2
        self.radii = self.ppower ** (1.0 / self.norm.p)
        masses = one_d_masses(self.radii, self.norm.p)
        w = np.empty_like(masses)
        w[:-1] = masses[:-1] - masses[1:]
        w[-1] = masses[-1]
        self.weights = w
        nw = self.N * w
        self.W = math.fsum(nw.tolist())
        self.p_zero = 1.0 / (1.0 + self.W)
        self.index_cdf = np.cumsum(nw) / nw.sum() if self.W > 0 else None
        self._prim_values = self.prim.float_values()

    def _draw_primitive(self, k: int, rng: np.random.Generator) -> tuple[int, ...]:
        count = int(self.signed_counts[k])
        if self.selector == "enumeration":
            j = int(rng.integers(count))
            return tuple(int(c) for c in self.prim.coeffs[j])
        r = float(self.radii[k]) * (1 + 1e-12)
        Q = None
        if self.selection_q_factor is not None:
            Q = next_prime(math.ceil(self.selection_q_factor * max(1, self.N[k])))
        for _ in range(self.max_selection_trials):
            v = uniform_primitive_sample(
                self.basis, self.norm, r, max(10, self.N[k]), max(10, self.f), self.oracle, rng, Q=Q
            )
            if v is not None and v.is_primitive:
                return v.coeffs
        raise RuntimeError("sparsification selector exhausted its trial budget")

    def sample(self, rng: np.random.Generator) -> LatticeVector:
        return LatticeVector(self.basis, tuple(int(c) for c in self.sample_coeffs(1, rng)[0]))

    def sample_coeffs(self, M: int, rng: np.random.Generator) -> np.ndarray:
        out = np.zeros((M, self.basis.n), dtype=np.int64)
        if self.index_cdf is None:
            return out
        nonzero = rng.random(M) >= self.p_zero
        cnt = int(nonzero.sum())
        if cnt == 0:
            return out
        ks = np.searchsorted(self.index_cdf, rng.random(cnt) * self.index_cdf[-1], side="right")
        ks = np.minimum(ks, self.ell)
        if self.selector == "enumeration":
            js = (rng.random(cnt) * self.signed_counts[ks]).astype(np.int64)
            js = np.minimum(js, self.signed_counts[ks] - 1)
            xs = self.prim.coeffs[js].astype(np.int64)
            norms = self._prim_values[js]
        else:
            rows = [self._draw_primitive(int(k), rng) for k in ks]
            xs = np.array(rows, dtype=np.int64)
            norms = np.array([LatticeVector(self.basis, r).norm(self.norm) for r in rows])
        zs = sample_multiples(norms, self.norm.p, rng)
        out[np.flatnonzero(nonzero)] = xs * zs[:, None]
        return out


def dss_via_svp(basis: Basis, p, f: int, rng: np.random.Generator, svp_oracle=None, selector: str = "enumeration") -> LatticeVector:
    """One sample of the ladder-based sampler."""
    return SvpDSS(basis, p, f, svp_oracle, selector).sample(rng)


# ---------------------------------------------------------------------------
# Continuous supergaussian
# ---------------------------------------------------------------------------


def c_p(p: float) -> float:
    """``C_p = 2^p Gamma(1 + 1/p)^p``, the normalizer making the density integrate to 1."""
    return 2.0**p * float(gamma_fn(1.0 + 1.0 / p)) ** p


@dataclass(frozen=True)
class ContinuousSupergaussian:
    """Density proportional to ``exp(-C_p ||x||_p^p)`` on R^m; uniform cube for p = inf."""

    norm: PNorm
    m: int

    def __post_init__(self):
        object.__setattr__(self, "norm", PNorm.parse(self.norm))

    @cached_property
    def C_p(self) -> float:
        if self.norm.is_inf:
            return math.inf
        return c_p(self.norm.p)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.m,) if size is None else (size, self.m)
        p = self.norm.p
        if self.norm.is_inf:
            return rng.uniform(-1.0, 1.0, size=shape)
        c = self.C_p
        if p == 1.0:
            return rng.laplace(0.0, 1.0 / c, size=shape)
        if p == 2.0:
            return rng.normal(0.0, math.sqrt(1.0 / (2.0 * c)), size=shape)
        return _rejection_supergaussian(c, p, shape, rng)


def _rejection_supergaussian(c: float, p: float, shape, rng: np.random.Generator) -> np.ndarray:
    """Coordinates with density prop. to exp(-c|x|^p) from a Laplace(rate c) envelope.

    ``-c u^p + c u`` is maximized at ``u* = p^{-1/(p-1)}``, so accepting with
    probability ``exp(c (u - u^p) - c (u* - u*^p))`` is valid.
    """
    ustar = p ** (-1.0 / (p - 1.0))
    top = c * (ustar - ustar**p)
    total = int(np.prod(shape))
    out = np.empty(total)
    filled = 0
    while filled < total:
        need = total - filled
        batch = max(64, int(need * 1.6))
        x = rng.laplace(0.0, 1.0 / c, size=batch)
        u = np.abs(x)
        acc = rng.random(batch) < np.exp(c * (u - u**p) - top)
        got = x[acc][:need]
        out[filled : filled + got.size] = got
        filled += got.size
    return out.reshape(shape)


def sample_continuous(dist: ContinuousSupergaussian, rng: np.random.Generator) -> np.ndarray:
    return dist.sample(rng)

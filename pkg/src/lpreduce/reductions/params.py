"""Parameters, guarantee formulas and shared result types for the reductions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..core import LatticeVector, PNorm
from ..oracles import OracleStats

log = logging.getLogger(__name__)

DESK = "desk"
THEORY = "theory"


def kappa(m: int, p, q) -> float:
    """``m^{1/p - 1/q}``."""
    p, q = PNorm.parse(p), PNorm.parse(q)
    inv = lambda x: 0.0 if x.is_inf else 1.0 / x.p  # noqa: E731
    return m ** (inv(p) - inv(q))


def _root(x: float, p: PNorm) -> float:
    """``x^{1/p}`` with ``x^{1/inf} = 1``."""
    return 1.0 if p.is_inf else x ** (1.0 / p.p)


def gamma_svp_to_svp(eps: float, p, gamma: float) -> float:
    """Approximation factor ``100 log^{1/p}(1/eps) gamma / eps^{1/p}`` reached in l_q."""
    p = PNorm.parse(p)
    return 100.0 * _root(math.log(1 / eps), p) * gamma / _root(eps, p)


def gamma_cvp_to_bdd(tau: float, gamma: float) -> float:
    return (1.0 + 1.0 / tau) * gamma


def gamma_bdd_to_usvp(eps: float, p, q) -> float:
    """``(80/eps)(10/eps log(1/eps))^{1/p}``, or ``80/eps`` when p = q."""
    p, q = PNorm.parse(p), PNorm.parse(q)
    if p == q:
        return 80.0 / eps
    return 80.0 / eps * _root(10.0 / eps * math.log(1 / eps), p)


def gamma_cvp_to_usvp(eps: float, p, q) -> float:
    """``(120/eps)(10/eps log(1/eps))^{1/p}``, or ``120/eps`` when p = q."""
    p, q = PNorm.parse(p), PNorm.parse(q)
    if p == q:
        return 120.0 / eps
    return 120.0 / eps * _root(10.0 / eps * math.log(1 / eps), p)


def gamma_cvp_to_cvp(eps: float, p, gamma: float) -> float:
    """``100 log^{1/p}(1/eps)/eps^{1/p} * gamma``."""
    p = PNorm.parse(p)
    return 100.0 * _root(math.log(1 / eps), p) / _root(eps, p) * gamma


@dataclass
class ReductionParams:
    """Knobs shared by all reductions.

    ``mode`` is ``"desk"`` (exact referee values replace the guessing steps)
    or ``"theory"`` (randomized guesses as in the proofs). Values of ``eps``
    outside (0, 1/100) are accepted with a logged waiver.

    ``coset_q_factor`` scales the point count into the coset modulus of the
    CVP to BDD step and ``sample_q_factor`` scales the primitive count into the
    modulus used for uSVP sampling. ``stop_factor`` (desk mode only) ends a
    driver early once the referee certifies an output within that factor.
    """

    eps: float = 0.5
    delta: float | None = None
    gamma_oracle: float = 1.0
    tau: float = 1.0
    alpha_bdd: float = 2.0
    Q_override: int | None = None
    max_trials: int = 100
    mode: str = DESK
    f: int = 10
    M: int = 1000
    dss_rel_err: float = 1e-3
    cell_budget: int = 2_000_000
    coset_q_factor: float = 100.0
    sample_q_factor: float = 0.5
    stop_factor: float | None = None
    dist_range: tuple[float, float] = (1e-3, 1e3)
    waivers: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.mode not in (DESK, THEORY):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.eps < 0.01:
            msg = f"eps={self.eps} is outside (0, 1/100); running under a desk-scale waiver"
            self.waivers.append(msg)
            log.info(msg)
        if self.delta is None:
            self.delta = self.eps / 41.0
        if self.max_trials < 1:
            raise ValueError("max_trials must be positive")

    def usvp_gamma(self) -> float:
        return 1.0 + self.delta


@dataclass
class ReductionResult:
    """Best output of a driver together with bookkeeping for audits."""

    vector: LatticeVector
    trials: int
    successes: int
    stats: OracleStats
    info: dict = field(default_factory=dict)


def rational_scale(target_value: float, current: float, den_limit: int = 1000) -> Fraction:
    """A small-denominator rational close to ``target_value / current``."""
    s = Fraction(target_value / current).limit_denominator(den_limit)
    if s <= 0:
        s = Fraction(1, den_limit)
    return s


def geometric_guess(lo: float, hi: float, ratio: float, rng: np.random.Generator) -> float:
    """A uniformly random point of the grid ``hi * ratio^i`` inside ``[lo, hi]``."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    steps = max(0, math.floor(math.log(lo / hi) / math.log(ratio)))
    return hi * ratio ** int(rng.integers(steps + 1))


class BestTracker:
    """Keeps the best candidate by (key, coefficients).

    With a ``stop_key`` the tracker reports ``done`` once the best key is at
    most that key.
    """

    def __init__(self, norm: PNorm, key_fn, stop_key=None):
        self.norm = norm
        self.key_fn = key_fn
        self.stop_key = stop_key
        self.best: LatticeVector | None = None
        self.best_key = None

    @property
    def done(self) -> bool:
        return (
            self.stop_key is not None
            and self.best is not None
            and self.norm.key_le(self.best_key, self.stop_key)
        )

    def offer(self, v: LatticeVector) -> None:
        k = self.key_fn(v)
        if self.best is None:
            self.best, self.best_key = v, k
            return
        if self.norm.keys_tied(k, self.best_key):
            if v.coeffs < self.best.coeffs:
                self.best = v
        elif k < self.best_key:
            self.best, self.best_key = v, k


def error_key(v: LatticeVector, target, norm: PNorm):
    """Key of ``v - target``."""
    return norm.key([a - b for a, b in zip(v.embedding, target)])


def error_value(v: LatticeVector, target, norm) -> float:
    norm = PNorm.parse(norm)
    return norm.key_to_value(error_key(v, target, norm))


def stop_key(params: "ReductionParams", norm: PNorm, referee_key):
    """Key threshold for early stopping, or None when disabled."""
    if params.stop_factor is None or params.mode != DESK:
        return None
    return norm.scale_key(referee_key, params.stop_factor)

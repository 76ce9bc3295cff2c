"""Approximate SVP in l_q from an approximate SVP oracle in l_p.

One trial sparsifies the lattice twice with independent random moduli
vectors, asks the l_p oracle for a short vector of each sublattice, and
keeps the l_q-shorter of the primitive part of the first answer and the
difference of the two answers.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import Basis, LatticeVector, PNorm, primitive_part
from ..errors import AllTrialsFailed, PromiseViolated, RankOne
from ..oracles import lambda1_key
from ..sparsify import Sparsifier, find_prime, sparsify
from .params import DESK, BestTracker, ReductionParams, ReductionResult, stop_key


def prime_window(m: int, eps: float, gamma: float) -> tuple[int, int]:
    """``[10 gamma m^2 2^{eps m/4}, 20 gamma m^2 2^{eps m/4}]``."""
    base = gamma * m * m * 2 ** (eps * m / 4)
    return math.ceil(10 * base), math.floor(20 * base)


def choose_modulus(basis: Basis, params: ReductionParams) -> int:
    if params.Q_override is not None:
        return int(params.Q_override)
    return find_prime(*prime_window(basis.m, params.eps, params.gamma_oracle))


def _shorter(a: LatticeVector, b: LatticeVector, q: PNorm) -> LatticeVector:
    ka, kb = a.key(q), b.key(q)
    if q.keys_tied(ka, kb):
        return min(a, b, key=lambda v: v.coeffs)
    return a if ka < kb else b


def svp_trial(basis: Basis, p, q, oracle, Q: int, rng: np.random.Generator) -> LatticeVector | None:
    """One trial. Returns None when both oracle answers vanish or a strict oracle refuses."""
    p, q = PNorm.parse(p), PNorm.parse(q)
    answers = []
    for _ in range(2):
        sub = sparsify(basis, Sparsifier.sample(Q, basis.n, rng))
        try:
            ans = oracle(sub.basis, p)
        except PromiseViolated:
            return None
        answers.append(sub.lift(ans.vector))
    v1, v2 = answers
    candidates = []
    if not v1.is_zero:
        candidates.append(primitive_part(v1)[0])
    if v1 != v2:
        candidates.append(v1 - v2)
    if not candidates:
        return None
    best = candidates[0]
    for c in candidates[1:]:
        best = _shorter(best, c, q)
    return best


def reduce_svp_q_to_svp_p(
    basis: Basis,
    p,
    q,
    oracle,
    rng: np.random.Generator,
    params: ReductionParams | None = None,
) -> ReductionResult:
    """Run up to ``max_trials`` trials and return the l_q-shortest nonzero output."""
    params = params or ReductionParams()
    p, q = PNorm.parse(p), PNorm.parse(q)
    if basis.n < 2:
        raise RankOne("sparsification needs rank at least 2")
    Q = choose_modulus(basis, params)
    oracle.stats.register_parent(basis)
    sk = stop_key(params, q, lambda1_key(basis, q)) if params.stop_factor else None
    tracker = BestTracker(q, lambda v: v.key(q), sk)
    successes = trials = 0
    while trials < params.max_trials and not tracker.done:
        trials += 1
        v = svp_trial(basis, p, q, oracle, Q, rng)
        if v is not None:
            successes += 1
            tracker.offer(v)
    if tracker.best is None:
        raise AllTrialsFailed(f"no nonzero output in {params.max_trials} trials")
    info = {"Q": Q, "mode": DESK if params.Q_override is None else "override"}
    return ReductionResult(tracker.best, trials, successes, oracle.stats, info)

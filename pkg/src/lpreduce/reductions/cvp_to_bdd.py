"""Approximate CVP from an approximate BDD oracle via random coset sparsification.

Each trial picks a random coset of a sparsified sublattice, shifts the
target into it, asks the BDD oracle and shifts back. Far targets (distance
at least lambda_1) get a modulus proportional to the number of lattice
points within ``dist / tau``.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import CvpInstance, count_in_ball
from ..errors import AllTrialsFailed, NoSolution, PromiseViolated
from ..oracles import distance_key, lambda1_key
from ..sparsify import Sparsifier, coset_point, find_prime, next_prime, sparsify
from .params import DESK, BestTracker, ReductionParams, ReductionResult, error_key, stop_key


def choose_coset_modulus(N: int, params: ReductionParams) -> int:
    """Least prime at least ``coset_q_factor * N`` (desk) or the least prime in ``[100N, 200N]`` (theory)."""
    if params.Q_override is not None:
        return int(params.Q_override)
    if params.mode == DESK:
        return next_prime(math.ceil(params.coset_q_factor * N))
    return find_prime(max(101, 100 * N), max(101, 200 * N))


def bdd_trial(inst: CvpInstance, oracle, Q: int, rng: np.random.Generator):
    """One coset trial. Returns a lattice vector or None."""
    B = inst.basis
    s = Sparsifier.sample(Q, B.n, rng, coset=True)
    try:
        y = coset_point(B, s)
    except NoSolution:
        return None
    sub = sparsify(B, s)
    shifted = tuple(a + b for a, b in zip(inst.target, y.embedding))
    try:
        ans = oracle(CvpInstance(sub.basis, shifted, inst.norm))
    except PromiseViolated:
        return None
    return sub.lift(ans.vector) - y


def reduce_cvp_to_bdd(
    inst: CvpInstance,
    oracle,
    rng: np.random.Generator,
    params: ReductionParams | None = None,
) -> ReductionResult:
    """A ``(1 + 1/tau) gamma`` approximate closest vector from a ``(1 + tau, gamma)``-BDD oracle."""
    params = params or ReductionParams()
    norm = inst.norm
    B = inst.basis
    oracle.stats.register_parent(B)
    dk = distance_key(inst)
    l1k = lambda1_key(B, norm)
    if not norm.key_le(l1k, dk):
        # dist < lambda_1, so the promise already holds for the original instance.
        try:
            ans = oracle(inst)
        except PromiseViolated as exc:
            raise AllTrialsFailed("the oracle refused an instance within its promise") from exc
        return ReductionResult(ans.vector, 1, 1, oracle.stats, {"direct": True})
    rkey = norm.scale_key(dk, 1 / params.tau)
    N = count_in_ball(B, norm, rkey)
    Q = choose_coset_modulus(N, params)
    tracker = BestTracker(norm, lambda v: error_key(v, inst.target, norm), stop_key(params, norm, dk))
    successes = trials = 0
    while trials < params.max_trials and not tracker.done:
        trials += 1
        v = bdd_trial(inst, oracle, Q, rng)
        if v is not None:
            successes += 1
            tracker.offer(v)
    if tracker.best is None:
        raise AllTrialsFailed(f"no BDD answer in {params.max_trials} trials")
    info = {"direct": False, "N": N, "Q": Q}
    return ReductionResult(tracker.best, trials, successes, oracle.stats, info)

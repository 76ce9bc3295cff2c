"""Approximate CVP in l_p from an approximate CVP oracle in l_q (p < q).

The target is randomly perturbed by continuous supergaussian noise before
each oracle call. After rescaling so the l_p distance sits at a fixed
scale, the perturbed target's l_q-closest vector is l_p-close to the
original target with noticeable probability.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..core import CvpInstance, LatticeVector, PNorm
from ..errors import AllTrialsFailed, PromiseViolated
from ..oracles import distance_key
from ..supergaussian import ContinuousSupergaussian, c_p
from .params import (
    DESK,
    BestTracker,
    ReductionParams,
    ReductionResult,
    error_key,
    geometric_guess,
    rational_scale,
    stop_key,
)

NOISE_GRID = 1024


def distance_window(m: int, eps: float, p: float) -> tuple[float, float]:
    """``[(1 - 1/m) W, W]`` with ``W = (eps m)^{1/p} / (2 C_p^{1/p})``."""
    hi = (eps * m) ** (1 / p) / (2 * c_p(p) ** (1 / p))
    return (1 - 1 / m) * hi, hi


def quantize(x: np.ndarray, grid: int = NOISE_GRID) -> tuple[Fraction, ...]:
    """Round a float vector to the grid ``Z / grid`` so targets stay small rationals."""
    return tuple(Fraction(int(round(v * grid)), grid) for v in x)


def perturbed_instance(inst: CvpInstance, q: PNorm, x, scale: Fraction) -> CvpInstance:
    """The l_q instance with target ``t + x / scale`` (noise drawn at unit scale)."""
    xq = quantize(np.asarray(x, dtype=float))
    return CvpInstance(inst.basis, tuple(a + b / scale for a, b in zip(inst.target, xq)), q)


def reduce_cvp_p_to_cvp_q(
    inst: CvpInstance,
    q,
    oracle,
    rng: np.random.Generator,
    params: ReductionParams | None = None,
) -> ReductionResult:
    """Best l_p output over up to ``max_trials`` perturbed l_q oracle calls.

    Rescaling the lattice by ``s`` and adding unit-scale noise is the same as
    adding noise divided by ``s`` to the original target, so the oracle only
    ever sees the original lattice.
    """
    params = params or ReductionParams()
    p, q = inst.norm, PNorm.parse(q)
    if p.is_inf:
        raise ValueError("the source norm must be finite")
    if not q.is_inf and q.p < p.p:
        raise ValueError("need p <= q")
    B = inst.basis
    m = B.m
    oracle.stats.register_parent(B)
    lo, hi = distance_window(m, params.eps, p.p)
    dk = distance_key(inst)
    ratio = 1 - 1 / max(m, 2)
    if params.mode == DESK:
        dist = p.key_to_value(dk)
        scale = Fraction(1) if dist == 0 else rational_scale((lo + hi) / 2, dist)
    noise = ContinuousSupergaussian(p, m)
    tracker = BestTracker(p, lambda v: error_key(v, inst.target, p), stop_key(params, p, dk))
    successes = trials = 0
    while trials < params.max_trials and not tracker.done:
        trials += 1
        if params.mode != DESK:
            scale = rational_scale(hi, geometric_guess(*params.dist_range, ratio, rng))
        try:
            ans = oracle(perturbed_instance(inst, q, noise.sample(rng), scale))
        except PromiseViolated:
            continue
        successes += 1
        tracker.offer(LatticeVector(B, ans.vector.coeffs))
    if tracker.best is None:
        raise AllTrialsFailed(f"no oracle answer in {params.max_trials} trials")
    info = {"scale": str(scale) if params.mode == DESK else None, "window": (lo, hi)}
    return ReductionResult(tracker.best, trials, successes, oracle.stats, info)

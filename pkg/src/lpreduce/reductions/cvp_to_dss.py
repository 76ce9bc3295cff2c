"""Approximate CVP from discrete supergaussian samples of an embedded lattice.

After rescaling so the distance is about ``m^{1/p}``, the target is embedded
with weight ``1/alpha`` (``alpha = gamma/4``). Samples in layer one encode
lattice vectors, and the shortest of them is a ``gamma``-approximate
closest vector with good probability.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..core import CvpInstance, LatticeVector, as_rational
from ..errors import AllTrialsFailed, EnumerationBudgetExceeded, NoLayerOneSample
from ..oracles import ExactSVP, OracleStats, distance_key
from ..supergaussian import ExactDSS, SvpDSS, _finite
from .embedding import kannan_embed
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


def full_sample_count(m: int, alpha: float, p: float, delta: float) -> int:
    """``100 e^{m/alpha^p + delta}``."""
    return math.ceil(100 * math.exp(m / alpha**p + delta))


def exact_dss_factory(rel_err: float = 1e-3):
    """Sampler factory backed by exact enumeration of the truncated distribution."""

    def make(basis, p):
        return ExactDSS(basis, p, rel_err)

    return make


def svp_dss_factory(f: int = 10, svp_oracle=None, selector: str = "enumeration"):
    """Sampler factory backed by the SVP-oracle ladder sampler."""

    def make(basis, p):
        oracle = svp_oracle if svp_oracle is not None else ExactSVP()
        oracle.stats.register_parent(basis)
        return SvpDSS(basis, p, f, svp_oracle=oracle, selector=selector)

    return make


def _layer_one_best(emb, coeffs: np.ndarray, p, target) -> LatticeVector | None:
    rows = coeffs[np.asarray(coeffs[:, -1] == 1, dtype=bool)]
    if len(rows) == 0:
        return None
    rows = np.unique(rows, axis=0)
    tracker = BestTracker(p, lambda v: error_key(v, target, p))
    for row in rows:
        tracker.offer(LatticeVector(emb.original, tuple(int(c) for c in row[:-1])))
    return tracker.best


def cvp_dss_trial(emb, sampler, M: int, p, target, rng) -> LatticeVector:
    """One batch of M samples; raises NoLayerOneSample when no sample lands in layer one."""
    best = _layer_one_best(emb, sampler.sample_coeffs(M, rng), p, target)
    if best is None:
        raise NoLayerOneSample(f"none of {M} samples has last coordinate 1")
    return best


def reduce_cvp_to_dss(
    inst: CvpInstance,
    gamma,
    dss_factory,
    rng: np.random.Generator,
    params: ReductionParams | None = None,
    M: int | None = None,
) -> ReductionResult:
    """A ``gamma``-approximate closest vector (gamma >= 4) from supergaussian samples.

    ``M`` defaults to ``params.M``; pass ``"full"`` for ``100 e^{m/alpha^p + delta}``.
    Each trial draws one batch and the best layer-one vector over all batches
    is returned.
    """
    params = params or ReductionParams()
    p = _finite(inst.norm)
    if not 1 <= p.p <= 2:
        raise ValueError("need 1 <= p <= 2")
    gamma = as_rational(gamma)
    if gamma < 4:
        raise ValueError("gamma must be at least 4")
    alpha = gamma / 4
    B = inst.basis
    m = B.m
    dk = distance_key(inst)
    root = m ** (1 / p.p)
    stats = OracleStats()
    samplers: dict = {}

    def setup(s: Fraction):
        # One sampler per scale; theory mode may revisit a guess.
        if s not in samplers:
            emb = kannan_embed(B, inst.target, s=1, pre_scale=s / alpha)
            stats.register_parent(emb.base)
            sampler = dss_factory(emb.base, p)
            stats.record("DSS", emb.base)
            samplers[s] = (emb, sampler)
        return samplers[s]

    ratio = 1 - 1 / max(m, 2)
    if params.mode == DESK:
        dist = p.key_to_value(dk)
        s = Fraction(1) if dist == 0 else rational_scale(root * (1 - 1 / (2 * m)), dist)
    else:
        s = rational_scale(root, geometric_guess(*params.dist_range, ratio, rng))
    emb, sampler = setup(s)
    if M is None:
        M = params.M
    elif M == "full":
        M = full_sample_count(m, float(alpha), p.p, sampler.delta)
    tracker = BestTracker(p, lambda v: error_key(v, inst.target, p), stop_key(params, p, dk))
    successes = trials = 0
    while trials < params.max_trials and not tracker.done:
        trials += 1
        if params.mode != DESK and trials > 1:
            s = rational_scale(root, geometric_guess(*params.dist_range, ratio, rng))
            try:
                emb, sampler = setup(s)
            except EnumerationBudgetExceeded:
                # A badly guessed scale makes the sampler infeasible; that trial fails.
                continue
        try:
            v = cvp_dss_trial(emb, sampler, M, p, inst.target, rng)
        except NoLayerOneSample:
            continue
        successes += 1
        tracker.offer(v)
    oracles = {id(o): o for _e, smp in samplers.values() if (o := getattr(smp, "oracle", None)) is not None}
    for oracle in oracles.values():
        stats = stats.merge(oracle.stats)
    if tracker.best is None:
        raise AllTrialsFailed(f"no layer-one sample in {trials} batches of {M}")
    info = {"scale": str(s), "alpha": str(alpha), "M": M, "delta": sampler.delta, "scales_tried": len(samplers)}
    return ReductionResult(tracker.best, trials, successes, stats, info)


def reduce_cvp_to_svp_supergaussian(
    inst: CvpInstance,
    gamma,
    svp_oracle,
    rng: np.random.Generator,
    params: ReductionParams | None = None,
    M: int | None = None,
) -> ReductionResult:
    """The CVP to DSS reduction with the SVP-oracle sampler (``f = params.f``)."""
    params = params or ReductionParams()
    return reduce_cvp_to_dss(inst, gamma, svp_dss_factory(params.f, svp_oracle), rng, params, M)

"""BDD in l_q from a unique-SVP oracle in l_p.

The target is rescaled to a fixed distance and embedded as an extra basis
column. Two short primitive vectors of the embedded lattice are sampled
through sparsification plus the uSVP oracle. When their layers are coprime
an integer combination lands in layer one, which encodes a lattice vector
close to the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import Basis, CvpInstance, LatticeVector, PNorm, box_cells, key_profile
from ..errors import AllTrialsFailed, EnumerationBudgetExceeded, NoSolution
from ..oracles import distance_key
from ..sparsify import find_prime, next_prime, sampling_window, uniform_primitive_sample
from .embedding import EmbeddedBasis, kannan_embed
from .params import (
    DESK,
    BestTracker,
    ReductionParams,
    ReductionResult,
    error_key,
    geometric_guess,
    kappa,
    rational_scale,
    stop_key,
)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, x, y)`` with ``a x + b y = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _convex_argmin(F, k0: int, tied) -> int:
    """Least minimizer of a convex function on the integers, starting near ``k0``."""
    cache: dict[int, object] = {}

    def f(k):
        if k not in cache:
            cache[k] = F(k)
        return cache[k]

    def rising(k):  # f(k + 1) >= f(k)
        return tied(f(k + 1), f(k)) or f(k + 1) > f(k)

    if rising(k0):
        hi = k0
        step = 1
        lo = k0 - step
        while rising(lo):
            hi = lo
            step *= 2
            lo = k0 - step
    else:
        lo = k0
        step = 1
        hi = k0 + step
        while not rising(hi):
            lo = hi
            step *= 2
            hi = k0 + step
    # rising(lo) is False and rising(hi) is True; find the first rising index.
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rising(mid):
            hi = mid
        else:
            lo = mid
    return hi


def combine_pair(v1: LatticeVector, v2: LatticeVector, q) -> LatticeVector:
    """The l_q-shortest ``z1 v1 - z2 v2`` in layer one.

    The layer of a vector is its last coefficient, which matches the last
    coordinate up to the scale of the embedding column. Raises NoSolution
    when the two layers are not coprime.
    """
    q = PNorm.parse(q)
    if v1.basis != v2.basis:
        raise ValueError("vectors belong to different bases")
    a, b = v1.coeffs[-1], v2.coeffs[-1]
    g, x, y = _egcd(a, b)
    if g != 1:
        raise NoSolution(f"layers {a} and {b} are not coprime")
    z1, z2 = x, -y  # z1 a - z2 b = 1
    w0 = z1 * v1 - z2 * v2
    d = b * v1 - a * v2
    if d.is_zero:
        return w0
    e0, ed = w0.embedding, d.embedding
    dd = sum(t * t for t in ed)
    k0 = round(-sum(s * t for s, t in zip(e0, ed)) / dd)
    k = _convex_argmin(lambda k: (w0 + k * d).key(q), k0, q.keys_tied)
    return w0 + k * d


@dataclass
class LadderChoice:
    """The radius picked from the ladder ``r_j = 2 (m + 1) j`` and its counts."""

    j: int
    r: int
    ratio: float
    slow_growth_ok: bool
    n_prim_inner: int
    n_prim_outer: int
    levels_scanned: int


def ratio_bound(m: int, eps: float) -> float:
    return 2 ** (eps * m / 4)


def desk_ladder(lattice: Basis, p: PNorm, m: int, eps: float, cell_budget: int) -> LadderChoice:
    """Pick the least ladder radius whose count ratio satisfies the slow-growth bound.

    Radii are scanned while their coefficient box fits ``cell_budget``. If no
    scanned level satisfies the bound, the level with the least ratio is used
    and ``slow_growth_ok`` is False.
    """
    unit = 2 * (m + 1)
    jmax = max(1, math.floor(20 / eps))
    J = 1
    while J < jmax and box_cells(lattice, p, unit * (J + 1)) <= cell_budget:
        J += 1
    if box_cells(lattice, p, unit * J) > cell_budget:
        raise EnumerationBudgetExceeded("even the first ladder radius exceeds the cell budget")
    prof = key_profile(lattice, p, p.value_to_key(unit * J), cell_cap=max(cell_budget, 1))
    bound = ratio_bound(m, eps)
    best = None
    for j in range(1, J + 1):
        outer = prof.count(p.value_to_key(unit * j))
        inner = prof.count(p.value_to_key(unit * (j - 1)))
        ratio = outer / inner
        if ratio <= bound:
            best = (j, ratio, True)
            break
        if best is None or ratio < best[1]:
            best = (j, ratio, False)
    j, ratio, ok = best
    r = unit * j
    return LadderChoice(
        j=j,
        r=r,
        ratio=ratio,
        slow_growth_ok=ok,
        n_prim_inner=prof.count_primitive(p.value_to_key(r - (m + 1))),
        n_prim_outer=prof.count_primitive(p.value_to_key(r)),
        levels_scanned=J,
    )


def _rescale(inst: CvpInstance, p: PNorm, params: ReductionParams, rng) -> tuple:
    """Scale factor putting ``dist_q`` into ``((m/kappa)(1 - 1/m), m/kappa]``."""
    m = inst.basis.m
    hi = m / kappa(m, p, inst.norm)
    if params.mode == DESK:
        dist = inst.norm.key_to_value(distance_key(inst))
        return rational_scale(hi * (1 - 1 / (2 * m)), dist), dist
    lo_d, hi_d = params.dist_range
    guess = geometric_guess(lo_d, hi_d, 1 - 1 / max(m, 2), rng)
    return rational_scale(hi, guess), None


@dataclass
class _Setup:
    emb: EmbeddedBasis
    r: int
    N: int
    f: int
    Q: int
    info: dict


def _desk_setup(inst: CvpInstance, p: PNorm, params: ReductionParams, rng) -> _Setup:
    m = inst.basis.m
    s, dist = _rescale(inst, p, params, rng)
    emb = kannan_embed(inst.basis, inst.target, s=1, pre_scale=s)
    lad = desk_ladder(emb.base, p, m, params.eps, params.cell_budget)
    N = max(1, math.ceil(lad.n_prim_inner / m))
    f = max(10, math.ceil(m * lad.n_prim_outer / max(1, lad.n_prim_inner)))
    if params.Q_override is not None:
        Q = int(params.Q_override)
    else:
        Q = next_prime(math.ceil(params.sample_q_factor * lad.n_prim_outer))
    info = {
        "scale": str(s),
        "dist": dist,
        "r": lad.r,
        "ladder_j": lad.j,
        "ladder_ratio": lad.ratio,
        "ratio_bound": ratio_bound(m, params.eps),
        "slow_growth_ok": lad.slow_growth_ok,
        "levels_scanned": lad.levels_scanned,
        "N_prim_inner": lad.n_prim_inner,
        "N_prim_outer": lad.n_prim_outer,
        "N": N,
        "f": f,
        "Q": Q,
    }
    return _Setup(emb, lad.r, N, f, Q, info)


def _theory_setup(inst: CvpInstance, p: PNorm, params: ReductionParams, rng) -> _Setup:
    m = inst.basis.m
    s, _ = _rescale(inst, p, params, rng)
    emb = kannan_embed(inst.basis, inst.target, s=1, pre_scale=s)
    jmax = max(1, math.floor(20 / params.eps))
    r = 2 * (m + 1) * int(rng.integers(1, jmax + 1))
    # N is guessed on a grid of ratio m up to a crude volume bound.
    top = max(1, math.ceil((m + 1) * math.log(2 * r + 3) / math.log(max(m, 2))))
    N = max(10, max(m, 2) ** int(rng.integers(top + 1)))
    f = max(10, params.f)
    Q = int(params.Q_override) if params.Q_override is not None else find_prime(*sampling_window(N, f))
    info = {"scale": str(s), "r": r, "N": N, "f": f, "Q": Q}
    return _Setup(emb, r, N, f, Q, info)


def bdd_usvp_trial(setup: _Setup, p: PNorm, q: PNorm, oracle, rng) -> LatticeVector | None:
    """Two samples and a layer-one combination; the lattice part or None."""
    L = setup.emb.base
    v1 = uniform_primitive_sample(L, p, setup.r, setup.N, setup.f, oracle, rng, Q=setup.Q)
    if v1 is None:
        return None
    v2 = uniform_primitive_sample(L, p, setup.r, setup.N, setup.f, oracle, rng, Q=setup.Q)
    if v2 is None:
        return None
    try:
        w = combine_pair(v1, v2, q)
    except NoSolution:
        return None
    return setup.emb.lattice_part(w)


def reduce_bdd_q_to_usvp_p(
    inst: CvpInstance,
    p,
    oracle,
    rng: np.random.Generator,
    params: ReductionParams | None = None,
) -> ReductionResult:
    """Approximate closest vector in l_q for BDD-style targets via a uSVP_p oracle.

    All oracle queries are sublattices of the embedded lattice, of rank
    ``n + 1`` in dimension ``m + 1``.
    """
    params = params or ReductionParams()
    p = PNorm.parse(p)
    q = inst.norm
    B = inst.basis
    hit = B.coords(inst.target)
    if hit is not None:
        return ReductionResult(LatticeVector(B, hit), 0, 0, oracle.stats, {"target_in_lattice": True})
    # Desk mode fixes the setup once; theory mode draws fresh guesses every trial.
    setup = (_desk_setup if params.mode == DESK else _theory_setup)(inst, p, params, rng)
    oracle.stats.register_parent(setup.emb.base)
    sk = stop_key(params, q, distance_key(inst)) if params.stop_factor else None
    tracker = BestTracker(q, lambda v: error_key(v, inst.target, q), sk)
    successes = trials = 0
    while trials < params.max_trials and not tracker.done:
        trials += 1
        if params.mode != DESK and trials > 1:
            setup = _theory_setup(inst, p, params, rng)
            oracle.stats.register_parent(setup.emb.base)
        v = bdd_usvp_trial(setup, p, q, oracle, rng)
        if v is not None:
            successes += 1
            tracker.offer(v)
    if tracker.best is None:
        raise AllTrialsFailed(f"no layer-one combination in {params.max_trials} trials")
    return ReductionResult(tracker.best, trials, successes, oracle.stats, setup.info)


class BddFromUsvp:
    """Adapter exposing the reduction as a BDD oracle callable on CVP instances."""

    kind = "BDD"

    def __init__(self, p, usvp_oracle, rng: np.random.Generator, params: ReductionParams):
        self.p = PNorm.parse(p)
        self.usvp = usvp_oracle
        self.rng = rng
        self.params = params
        self.stats = usvp_oracle.stats
        self.results: list[ReductionResult] = []

    def __call__(self, inst: CvpInstance):
        from ..oracles import OracleAnswer

        res = reduce_bdd_q_to_usvp_p(inst, self.p, self.usvp, self.rng, self.params)
        self.results.append(res)
        return OracleAnswer(res.vector, self.kind, 1.0)

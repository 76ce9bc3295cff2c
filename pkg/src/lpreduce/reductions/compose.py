"""Compositions of the basic reductions."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..core import CvpInstance
from .bdd_to_usvp import BddFromUsvp
from .cvp_to_bdd import reduce_cvp_to_bdd
from .params import ReductionParams, ReductionResult


def reduce_cvp_q_to_usvp_p(
    inst: CvpInstance,
    p,
    usvp_oracle,
    rng: np.random.Generator,
    params: ReductionParams | None = None,
    inner_params: ReductionParams | None = None,
) -> ReductionResult:
    """Approximate CVP in l_q through the coset reduction (tau = 1) into the uSVP-based BDD solver.

    ``inner_params`` configures every inner BDD solve (defaults to ``params``).
    The oracle log covers every uSVP query made by the inner solves.
    """
    params = replace(params or ReductionParams(), tau=1.0)
    inner = inner_params if inner_params is not None else params
    bdd = BddFromUsvp(p, usvp_oracle, rng, inner)
    res = reduce_cvp_to_bdd(inst, bdd, rng, params)
    res.info["inner_runs"] = len(bdd.results)
    res.info["inner_slow_growth_ok"] = [r.info.get("slow_growth_ok") for r in bdd.results]
    return res

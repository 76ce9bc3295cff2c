"""Reductions between lattice problems across l_p norms."""

from .bdd_to_usvp import BddFromUsvp, combine_pair, desk_ladder, reduce_bdd_q_to_usvp_p
from .compose import reduce_cvp_q_to_usvp_p
from .cvp_to_bdd import reduce_cvp_to_bdd
from .cvp_to_cvp import reduce_cvp_p_to_cvp_q
from .cvp_to_dss import (
    exact_dss_factory,
    full_sample_count,
    reduce_cvp_to_dss,
    reduce_cvp_to_svp_supergaussian,
    svp_dss_factory,
)
from .embedding import EmbeddedBasis, kannan_embed
from .params import (
    ReductionParams,
    ReductionResult,
    error_value,
    gamma_bdd_to_usvp,
    gamma_cvp_to_bdd,
    gamma_cvp_to_cvp,
    gamma_cvp_to_usvp,
    gamma_svp_to_svp,
    kappa,
)
from .svp_to_svp import reduce_svp_q_to_svp_p

__all__ = [
    "BddFromUsvp",
    "EmbeddedBasis",
    "ReductionParams",
    "ReductionResult",
    "combine_pair",
    "desk_ladder",
    "error_value",
    "exact_dss_factory",
    "full_sample_count",
    "gamma_bdd_to_usvp",
    "gamma_cvp_to_bdd",
    "gamma_cvp_to_cvp",
    "gamma_cvp_to_usvp",
    "gamma_svp_to_svp",
    "kannan_embed",
    "kappa",
    "reduce_bdd_q_to_usvp_p",
    "reduce_cvp_p_to_cvp_q",
    "reduce_cvp_q_to_usvp_p",
    "reduce_cvp_to_bdd",
    "reduce_cvp_to_dss",
    "reduce_cvp_to_svp_supergaussian",
    "reduce_svp_q_to_svp_p",
    "svp_dss_factory",
]

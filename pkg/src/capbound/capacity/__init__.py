"""Holevo information and classical-capacity upper bounds."""

from .bounds import (
    BOUND_METHODS,
    BoundReport,
    TradeoffPoint,
    bound_covariance,
    bound_eb,
    bound_hadamard_s,
    c_beta_report,
    eps_hadamard_upper_bound,
    f1,
    f2,
    g_eps,
    random_bipartite_ensemble,
    tau_state,
    tradeoff_envelope,
    tradeoff_outer,
    xi_state,
)
from .holevo import (
    DEFAULT_RESTARTS,
    Ensemble,
    bloch_affine,
    holevo_ampdamp_closed_form,
    holevo_ensemble,
    holevo_information,
    holevo_one_design,
    maximize_entropy_difference,
    min_output_entropy,
)

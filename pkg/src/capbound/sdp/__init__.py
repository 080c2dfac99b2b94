"""Semidefinite programming: solver, problem builder and the channel programs."""

from .problem import BuiltSolution, HermExpr, SdpBuilder, SdpProblem, embed_hermitian, solve, unembed_hermitian
from .programs import (
    ampdamp_diamond_dual_certificate,
    beta_value,
    c_beta,
    computational_basis,
    diamond_distance,
    eb_lower_bound_ampdamp,
    eb_parameter,
    eb_primal_certificate_ampdamp,
    hadamard_channel,
    hadamard_deg_parameter,
    hadamard_s_parameter,
)
from .solver import SdpSolution, smat, solve_standard, svec

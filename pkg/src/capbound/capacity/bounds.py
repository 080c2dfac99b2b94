"""Classical-capacity upper bounds and the sampled trade-off region bound."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import linalg as la
from ..channels import (Channel, choi_from_kraus, compose, kraus_from_choi, minimal, renormalize_choi,
                        stinespring)
from ..errors import DimensionError, ParameterError
from ..sdp import programs
from ..symmetry import GroupRep, covariance_parameter, pauli_rep, twirl_channel
from .holevo import DEFAULT_RESTARTS, Ensemble, holevo_information, holevo_one_design, \
    maximize_entropy_difference

EPS_SLACK = 1e-9  # SDP optima may land a hair outside [0, 1]
HADAMARD_TOL = 1e-6


def _clip_eps(eps, name="eps"):
    eps = float(eps)
    if not -EPS_SLACK <= eps <= 1 + EPS_SLACK:
        raise ParameterError(f"{name}={eps} outside [0, 1]")
    return min(max(eps, 0.0), 1.0)


def g_eps(eps: float) -> float:
    """``(1+e) log2(1+e) - e log2(e)`` with ``g(0) = 0``."""
    e = _clip_eps(eps)
    if e == 0.0:
        return 0.0
    return float((1 + e) * np.log2(1 + e) - e * np.log2(e))


def f1(eps: float, dim_b: int) -> float:
    e = _clip_eps(eps)
    return 2 * e * np.log2(dim_b) + g_eps(e)


def f2(eps: float, dim_b: int, dim_e: int) -> float:
    """``f1`` plus the environment term at ``sqrt(2 eps)``; needs ``2 eps <= 1``."""
    e = _clip_eps(eps)
    if 2 * e > 1 + EPS_SLACK:
        raise ParameterError(f"f2 needs 2*eps <= 1, got eps={e}")
    r = min(np.sqrt(2 * e), 1.0)
    return f1(e, dim_b) + 2 * r * np.log2(dim_e) + g_eps(r)


@dataclass
class BoundReport:
    """One capacity upper bound with its ingredients.

    ``upper_form_M`` is built on the approximating channel, ``upper_form_N`` on
    the channel itself; either may be ``None`` when the method has no such form.
    """

    channel: str
    method: str
    epsilon: float | None
    holevo_lower: float | None
    upper_form_M: float | None
    upper_form_N: float | None = None
    p: float | None = None
    components: dict = field(default_factory=dict)

    @property
    def upper_bound(self) -> float:
        forms = [v for v in (self.upper_form_M, self.upper_form_N) if v is not None]
        return min(forms)

    def to_record(self) -> dict:
        return {"channel": self.channel, "method": self.method, "p": self.p, "epsilon": self.epsilon,
                "holevo_lower": self.holevo_lower, "upper_form_M": self.upper_form_M,
                "upper_form_N": self.upper_form_N, "upper_bound": self.upper_bound}


def _lower(ch, holevo_lower, restarts, seed):
    if holevo_lower is not None:
        return float(holevo_lower)
    return holevo_information(ch, restarts=restarts, seed=seed)[0]


def _two_forms(ch, method, eps, chi_m, chi_n, dim_b, p, extra=None):
    e = _clip_eps(eps, "epsilon")
    lb = np.log2(dim_b)
    comp = {"base_M": chi_m, "log_term_M": 2 * e * lb, "g_term_M": g_eps(e),
            "base_N": chi_n, "log_term_N": 3 * e * lb, "g_term_N": 2 * g_eps(e)}
    comp.update(extra or {})
    form_m = None if chi_m is None else chi_m + comp["log_term_M"] + comp["g_term_M"]
    form_n = chi_n + comp["log_term_N"] + comp["g_term_N"]
    return BoundReport(ch.name, method, e, chi_n, form_m, form_n, p, comp)


def bound_covariance(ch: Channel, g: GroupRep | None = None, holevo_lower=None,
                     restarts: int = DEFAULT_RESTARTS, seed: int = 0, p=None) -> BoundReport:
    """Bound from the distance to the twirled (covariant) channel.

    :param g: representation to twirl over; the default Pauli group needs a qubit channel
    """
    if g is None:
        if (ch.dim_in, ch.dim_out) != (2, 2):
            raise DimensionError("the Pauli covariance bound is for qubit-to-qubit channels")
        g = pauli_rep()
    eps = covariance_parameter(ch, g)
    chi_g = holevo_one_design(twirl_channel(ch, g), g)
    chi_n = _lower(ch, holevo_lower, restarts, seed)
    return _two_forms(ch, "covariance", eps, chi_g, chi_n, ch.dim_out, p, {"group": g.name})


def bound_eb(ch: Channel, holevo_lower=None, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
             p=None) -> BoundReport:
    """Bound from the closest entanglement-breaking channel."""
    eps, closest, _ = programs.eb_parameter(ch)
    m = kraus_from_choi(renormalize_choi(closest), name="closest_eb")
    chi_m = holevo_information(m, restarts=restarts, seed=seed)[0]
    chi_n = _lower(ch, holevo_lower, restarts, seed)
    return _two_forms(ch, "eb", eps, chi_m, chi_n, ch.dim_out, p)


def bound_hadamard_s(ch: Channel, s=None, holevo_lower=None, restarts: int = DEFAULT_RESTARTS,
                     seed: int = 0, p=None) -> BoundReport:
    """Bound from the closest Hadamard channel for a fixed vector set ``s``."""
    if s is None:
        s = programs.computational_basis(ch.dim_in)
    eps, gram, _ = programs.hadamard_s_parameter(ch, s)
    m = programs.hadamard_channel(gram, s)
    chi_m = holevo_information(m, restarts=restarts, seed=seed)[0]
    chi_n = _lower(ch, holevo_lower, restarts, seed)
    return _two_forms(ch, "hadamard_s", eps, chi_m, chi_n, ch.dim_out, p)


def eps_hadamard_upper_bound(ch: Channel, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                             holevo_lower=None, p=None) -> BoundReport:
    """Bound from an approximate degrading map of the complementary channel.

    With ``D: B -> E`` the degrading map from the PPT program, the maximized
    quantity is ``S(N(rho_bar)) - sum p S(D(N(psi_x)))``: the entropy of ``FE``
    after the Stinespring isometry of ``D`` equals that of ``B``.
    """
    ch = minimal(ch)
    eps, deg, _ = programs.hadamard_deg_parameter(ch)
    d_map = kraus_from_choi(renormalize_choi(deg), name="degrading")
    base, _ = maximize_entropy_difference(ch, compose(d_map, ch), restarts=restarts, seed=seed)
    e = _clip_eps(eps, "epsilon")
    dim_e = d_map.dim_out
    comp = {"base": base, "log_term": 2 * e * np.log2(dim_e), "g_term": g_eps(e), "dim_env": dim_e}
    upper = base + comp["log_term"] + comp["g_term"]
    chi_n = _lower(ch, holevo_lower, restarts, seed)
    return BoundReport(ch.name, "hadamard_deg", e, chi_n, upper, None, p, comp)


def xi_state(ch: Channel, degrading: Channel, e: Ensemble) -> la.MultipartiteOperator:
    """``sum_x p(x) |x><x| (x) (U^D o N)(psi_x)`` with labels ``(X, F, E)``."""
    iso = stinespring(degrading)
    v = iso.v  # rows ordered as E (x) F, i.e. output of D first, then its environment
    k = len(e)
    d_e, d_f = degrading.dim_out, iso.dim_env
    blocks = []
    for prob, rho in zip(e.probs, e.density_matrices()):
        out = v @ ch(rho) @ la.dagger(v)
        blocks.append(prob * la.permute_systems(out, (d_e, d_f), (1, 0)))
    dim = d_f * d_e
    mat = np.zeros((k * dim, k * dim), dtype=complex)
    for x, b in enumerate(blocks):
        mat[x * dim:(x + 1) * dim, x * dim:(x + 1) * dim] = b
    return la.MultipartiteOperator(mat, (k, d_f, d_e), ("X", "F", "E"))


def c_beta_report(ch: Channel, holevo_lower=None, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                  p=None) -> BoundReport:
    value = programs.c_beta(ch)
    chi_n = _lower(ch, holevo_lower, restarts, seed)
    return BoundReport(ch.name, "c_beta", None, chi_n, value, None, p, {"base": value})


BOUND_METHODS = {
    "covariance": bound_covariance,
    "eb": bound_eb,
    "hadamard_s": bound_hadamard_s,
    "hadamard_deg": eps_hadamard_upper_bound,
    "c_beta": c_beta_report,
}


# ---------------------------------------------------------------------------
# Trade-off region
# ---------------------------------------------------------------------------


@dataclass
class TradeoffPoint:
    """Right-hand sides (with offsets) of the three region inequalities for one ensemble.

    ``sampled`` marks that a union over finitely many ensembles only
    approximates the region from inside.
    """

    ensemble: Ensemble
    rhs_cq: float
    rhs_qe: float
    rhs_cqe: float
    sampled: bool = True


def random_bipartite_ensemble(dim_ref: int, dim_in: int, k: int, rng: np.random.Generator) -> Ensemble:
    """``k`` Haar-random pure states on ``ref (x) in`` with Dirichlet weights."""
    probs = rng.dirichlet(np.ones(k))
    states = np.stack([la.haar_state(dim_ref * dim_in, rng) for _ in range(k)])
    return Ensemble(probs, states)


def tau_state(ch: Channel, e: Ensemble) -> la.MultipartiteOperator:
    """``sum_x p(x) |x><x| (x) (id (x) M)(phi_x)`` with labels ``(X, A, B)``."""
    if e.dim % ch.dim_in:
        raise DimensionError(f"state dimension {e.dim} is not a multiple of the input {ch.dim_in}")
    d_a = e.dim // ch.dim_in
    k, dim = len(e), d_a * ch.dim_out
    kraus = np.stack([np.kron(np.eye(d_a), kk) for kk in ch.kraus])
    mat = np.zeros((k * dim, k * dim), dtype=complex)
    for x, (prob, rho) in enumerate(zip(e.probs, e.density_matrices())):
        out = np.einsum("kij,jl,kml->im", kraus, rho, kraus.conj())
        mat[x * dim:(x + 1) * dim, x * dim:(x + 1) * dim] = prob * out
    return la.MultipartiteOperator(mat, (k, d_a, ch.dim_out), ("X", "A", "B"))


def tradeoff_outer(ch_m: Channel, eps: float, ensembles, s=None) -> list:
    """Evaluate the region inequalities of a Hadamard channel for each sampled ensemble.

    :param ch_m: Hadamard channel (checked by the Had_S program)
    :param eps: approximation parameter of the original channel, ``2 eps <= 1``
    :param ensembles: :class:`Ensemble` objects over ``ref (x) input``
    """
    had, _, _ = programs.hadamard_s_parameter(ch_m, s)
    if had > HADAMARD_TOL:
        raise ParameterError(f"channel is not Hadamard (Had_S = {had:.3g})")
    dim_b = ch_m.dim_out
    dim_e = len(minimal(ch_m).kraus)
    off1, off2 = f1(eps, dim_b), f2(eps, dim_b, dim_e)
    points = []
    for e in ensembles:
        tau = tau_state(ch_m, e)
        i_axb = la.mutual_information(tau, "AX", "B")
        i_coh = la.coherent_information(tau, "A", "BX")
        i_xb = la.mutual_information(tau, "X", "B")
        points.append(TradeoffPoint(e, i_axb + off1, i_coh + off2, i_xb + i_coh + off2))
    return points


def tradeoff_envelope(points) -> dict:
    """Pointwise maximum of the three right-hand sides over the samples."""
    return {"rhs_cq": max(pt.rhs_cq for pt in points), "rhs_qe": max(pt.rhs_qe for pt in points),
            "rhs_cqe": max(pt.rhs_cqe for pt in points), "samples": len(points), "sampled": True}

"""Semidefinite programs over Choi operators: distances and approximation parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import linalg as la
from ..channels import Channel, ChoiOperator, choi_from_kraus, complementary, minimal
from ..errors import DimensionError, DimensionGuardError, InvalidStateError, ParameterError
from .problem import HermExpr, SdpBuilder, BuiltSolution

PPT_GUARD = 6
RESULT_TOL = 1e-7  # validation tolerance for Choi operators read off SDP solutions


def as_choi(obj) -> ChoiOperator:
    if isinstance(obj, ChoiOperator):
        return obj
    if isinstance(obj, Channel):
        return choi_from_kraus(obj)
    raise TypeError(f"expected a Channel or ChoiOperator, got {type(obj).__name__}")


def _choi_result(m, dim_in, dim_out) -> ChoiOperator:
    # constraints hold to solver tolerance only, hence the looser validation
    return ChoiOperator(la.hermitize(m), dim_in, dim_out, tol=RESULT_TOL)


@dataclass
class ProgramResult:
    """Optimal value of a program together with the raw solver record."""

    value: float
    solved: BuiltSolution

    @property
    def solution(self):
        return self.solved.solution


def _diamond_part(bld: SdpBuilder, diff: HermExpr, dims) -> HermExpr:
    """Add ``Z >= diff, Z >= 0, tr_B Z <= mu 1`` and return ``mu``."""
    d_a, d_b = dims
    z = bld.psd_block("Z", d_a * d_b)
    mu = bld.free_scalar()
    bld.constrain_psd(z - diff, name="Z_minus_diff")
    bld.constrain_psd(mu.kron_left(np.eye(d_a)) - z.ptrace(dims, [0]), name="mu_minus_trZ")
    return mu


def diamond_distance(n, m, tol: float = 1e-8, full: bool = False):
    """Half the diamond norm of ``N - M``.

    :param n: channel or Choi operator
    :param m: channel or Choi operator with the same dimensions
    :param full: also return the :class:`ProgramResult`
    """
    n, m = as_choi(n), as_choi(m)
    if n.dims != m.dims:
        raise DimensionError(f"channels act on different spaces: {n.dims} vs {m.dims}")
    bld = SdpBuilder()
    diff = HermExpr.constant(n.matrix - m.matrix)
    mu = _diamond_part(bld, diff, n.dims)
    bld.minimize(mu)
    solved = bld.solve(tol=tol)
    value = solved.optimum
    return (value, ProgramResult(value, solved)) if full else value


def _guard(d1, d2, what):
    if d1 * d2 > PPT_GUARD:
        raise DimensionGuardError(
            f"{what}: PPT equals separability only for dimension product <= {PPT_GUARD}, got {d1}x{d2}")


def eb_parameter(n, tol: float = 1e-8):
    """Distance to the closest entanglement-breaking channel.

    :returns: ``(value, closest_eb_choi, result)``
    """
    n = as_choi(n)
    _guard(n.dim_in, n.dim_out, "eb_parameter")
    dims = n.dims
    bld = SdpBuilder()
    mm = bld.psd_block("M", n.dim_in * n.dim_out)
    bld.constrain_eq(mm.ptrace(dims, [0]), np.eye(n.dim_in))
    bld.constrain_psd(mm.ptranspose(dims, 1), name="M_ppt")
    mu = _diamond_part(bld, HermExpr.constant(n.matrix) - mm, dims)
    bld.minimize(mu)
    solved = bld.solve(tol=tol)
    closest = _choi_result(solved.value(mm), n.dim_in, n.dim_out)
    return solved.optimum, closest, ProgramResult(solved.optimum, solved)


def computational_basis(d: int) -> list:
    return [la.ket(i, d) for i in range(d)]


def _check_resolution(s, dim_in):
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in s]
    if any(v.shape != (dim_in,) for v in vecs):
        raise DimensionError(f"vectors in S must have dimension {dim_in}")
    total = sum(np.outer(v, v.conj()) for v in vecs)
    dev = np.max(np.abs(total - np.eye(dim_in)))
    if dev > 1e-9:
        raise InvalidStateError(f"vectors in S do not resolve the identity (deviation {dev:.3g})")
    return np.stack(vecs)


def hadamard_choi_from_gram(gram_expr, psi: np.ndarray):
    """Choi operator of ``rho -> sum_kl Gamma_kl <psi_k|rho|psi_l> |k><l|``.

    Works on a batch of Gram matrices (leading axes) so it also serves as the
    linear map inside the Had_S program.
    """
    d_s, d_a = psi.shape
    # out[..., i, k, j, l] = Gamma[k, l] conj(psi_k[i]) psi_l[j]
    out = np.einsum("...kl,ki,lj->...ikjl", gram_expr, psi.conj(), psi)
    return out.reshape(out.shape[:-4] + (d_a * d_s, d_a * d_s))


def hadamard_channel(gram, s) -> Channel:
    """Channel ``rho -> Gamma * [rho]_S`` for a PSD Gram matrix with unit diagonal."""
    psi = _check_resolution(s, len(s[0]))
    from ..channels import kraus_from_choi

    from ..channels import renormalize_choi

    gram = la.hermitize(la.as_matrix(gram))
    w, v = np.linalg.eigh(gram)
    gram = (v * np.clip(w, 0, None)) @ la.dagger(v)
    scale = 1 / np.sqrt(np.real(np.diag(gram)))
    gram = gram * np.outer(scale, scale)  # unit diagonal exactly
    choi = ChoiOperator(hadamard_choi_from_gram(gram, psi), psi.shape[1], psi.shape[0], tol=RESULT_TOL)
    return kraus_from_choi(renormalize_choi(choi))


def hadamard_s_parameter(n, s=None, tol: float = 1e-8):
    """Distance to the closest channel that is Hadamard with respect to the vectors ``s``.

    :param s: input vectors resolving the identity, one per output basis vector;
              defaults to the computational basis
    :returns: ``(value, gram, result)``
    """
    n = as_choi(n)
    if s is None:
        s = computational_basis(n.dim_in)
    psi = _check_resolution(s, n.dim_in)
    if psi.shape[0] != n.dim_out:
        raise DimensionError(f"|S| = {psi.shape[0]} must equal the output dimension {n.dim_out}")
    bld = SdpBuilder()
    gram = bld.psd_block("Gamma", psi.shape[0])
    for k in range(psi.shape[0]):
        unit = np.zeros((psi.shape[0], psi.shape[0]))
        unit[k, k] = 1.0
        row = gram.map(lambda m, u=unit: np.einsum("...ij,ij->...", m, u)[..., None, None])
        bld.constrain_eq(row, 1.0)
    o_gamma = gram.map(lambda m: hadamard_choi_from_gram(m, psi))
    mu = _diamond_part(bld, HermExpr.constant(n.matrix) - o_gamma, n.dims)
    bld.minimize(mu)
    solved = bld.solve(tol=tol)
    return solved.optimum, solved.value(gram), ProgramResult(solved.optimum, solved)


def compose_with_choi(d_be, n_ab, d_a: int, d_b: int, d_e: int):
    """Choi of ``D o N`` from Choi operators ``N_AB`` and ``D_BE`` (batch-aware in ``D``).

    ``J[a,e,a',e'] = sum_{b,b'} N[a,b,a',b'] D[b,e,b',e']``.
    """
    nt = np.asarray(n_ab).reshape(d_a, d_b, d_a, d_b)
    dt = np.asarray(d_be).reshape(d_be.shape[:-2] + (d_b, d_e, d_b, d_e))
    out = np.einsum("abcd,...bedf->...aecf", nt, dt)
    return out.reshape(out.shape[:-4] + (d_a * d_e, d_a * d_e))


def hadamard_deg_parameter(ch: Channel, tol: float = 1e-8):
    """Distance of the complementary channel to channels reachable by PPT degrading maps.

    The environment is the minimal one (Choi rank of ``ch``).

    :returns: ``(value, degrading_choi, result)`` with ``degrading_choi`` a Choi on ``B (x) E``
    """
    if not isinstance(ch, Channel):
        raise TypeError("hadamard_deg_parameter needs a Channel (its complementary is required)")
    ch = minimal(ch)
    comp = complementary(ch)
    d_a, d_b, d_e = ch.dim_in, ch.dim_out, comp.dim_out
    _guard(d_b, d_e, "hadamard_deg_parameter")
    n_ab = choi_from_kraus(ch).matrix
    n_c = choi_from_kraus(comp).matrix
    bld = SdpBuilder()
    dd = bld.psd_block("D", d_b * d_e)
    bld.constrain_eq(dd.ptrace((d_b, d_e), [0]), np.eye(d_b))
    bld.constrain_psd(dd.ptranspose((d_b, d_e), 1), name="D_ppt")
    j = dd.map(lambda m: compose_with_choi(m, n_ab, d_a, d_b, d_e))
    mu = _diamond_part(bld, HermExpr.constant(n_c) - j, (d_a, d_e))
    bld.minimize(mu)
    solved = bld.solve(tol=tol)
    deg = _choi_result(solved.value(dd), d_b, d_e)
    return solved.optimum, deg, ProgramResult(solved.optimum, solved)


def beta_value(n, tol: float = 1e-8, full: bool = False):
    """Optimum of the strong-converse SDP (before the logarithm)."""
    n = as_choi(n)
    dims = n.dims
    bld = SdpBuilder()
    r = bld.free_hermitian(n.dim_in * n.dim_out)
    s = bld.free_hermitian(n.dim_out)
    nt = la.ptranspose(n.matrix, dims, 1)
    bld.constrain_psd(r - nt, name="R_minus_NT")
    bld.constrain_psd(r + nt, name="R_plus_NT")
    rt = r.ptranspose(dims, 1)
    one_s = s.kron_left(np.eye(n.dim_in))
    bld.constrain_psd(one_s - rt, name="S_minus_RT")
    bld.constrain_psd(one_s + rt, name="S_plus_RT")
    bld.minimize(s.trace())
    solved = bld.solve(tol=tol)
    return (solved.optimum, ProgramResult(solved.optimum, solved)) if full else solved.optimum


def c_beta(n, tol: float = 1e-8, full: bool = False):
    """Strong-converse upper bound on the classical capacity, in bits."""
    beta, res = beta_value(n, tol=tol, full=True)
    value = float(np.log2(beta))
    return (value, res) if full else value


# ---------------------------------------------------------------------------
# Analytic certificates for the amplitude damping channel
# ---------------------------------------------------------------------------


def _check_p(p, lo_open=False):
    p = float(p)
    if not (0.0 < p <= 1.0 if lo_open else 0.0 <= p <= 1.0):
        raise ParameterError(f"p={p} outside the admissible range")
    return p


def eb_lower_bound_ampdamp(p: float) -> float:
    """``(1-p)(2 sqrt(1-p) - p) / (4(1-p) - p^2)``.

    Evaluated as ``(1-p) / (2 sqrt(1-p) + p)``; numerator and denominator of the
    unreduced form share the root ``p = 2 sqrt2 - 2`` inside ``[0, 1]``.
    """
    p = _check_p(p)
    return (1 - p) / (2 * np.sqrt(1 - p) + p)


@dataclass
class Certificate:
    value: float
    witness: dict
    checks: dict  # name -> deviation (<= 0 means satisfied for inequalities)

    def feasible(self, tol: float = 1e-9) -> bool:
        return all(v <= tol for v in self.checks.values())


def eb_primal_certificate_ampdamp(p: float) -> Certificate:
    """Explicit dual-side feasible point certifying ``eb(A_p) >= f(p)``.

    Uses the ansatz with ``r^2 = q1 q2`` and ``r = 1 - (q1 + q2)/2``; the
    free parameter is fixed at the maximizer of the objective.
    """
    from ..channels import amplitude_damping

    p = _check_p(p)
    a = choi_from_kraus(amplitude_damping(p)).matrix
    q1, q2, r = _eb_ansatz_params(p)
    nn = np.zeros((4, 4))
    nn[0, 0], nn[3, 3], nn[0, 3], nn[3, 0] = q1, q2, r, r
    pp = np.zeros((4, 4))
    pp[0, 0], pp[3, 3] = 0.0, 0.0
    pp[1:3, 1:3] = [[q1, -r], [-r, q2]]
    h = np.diag([q1, q2])
    m = np.diag([q1 + r, q2 + r])
    value = 0.5 * (np.real(np.trace(nn @ a)) - np.trace(h))
    dims = (2, 2)
    mineig = lambda x: float(np.linalg.eigvalsh(la.hermitize(x))[0])
    checks = {
        "tr M <= 2": float(np.trace(m) - 2),
        "N <= M (x) 1": -mineig(np.kron(m, np.eye(2)) - nn),
        "N + P^TB <= H (x) 1": -mineig(np.kron(h, np.eye(2)) - nn - la.ptranspose(pp, dims, 1)),
        "M >= 0": -mineig(m),
        "N >= 0": -mineig(nn),
        "P >= 0": -mineig(pp),
    }
    return Certificate(float(value), {"N": nn, "P": pp, "H": h, "M": m}, checks)


def _eb_ansatz_params(p: float):
    """Maximize ``(2 r sqrt(1-p) - p q2)/2`` on the ansatz curve, in closed form."""
    s = np.sqrt(1 - p)
    # parametrize the curve r^2 = q1 q2, r = 1 - (q1+q2)/2 by u = sqrt(q1), v = sqrt(q2):
    # r = u v and u v = 1 - (u^2 + v^2)/2  <=>  (u + v)^2 = 2, so u = sqrt2 - v.
    # objective (2 s u v - p v^2)/2 is a concave quadratic in v.
    rt2 = np.sqrt(2.0)
    # d/dv [s (rt2 - v) v - p v^2 / 2] = s rt2 - 2 s v - p v = 0
    v = s * rt2 / (2 * s + p)
    u = rt2 - v
    return u * u, v * v, u * v


def ampdamp_diamond_dual_certificate(p: float) -> Certificate:
    """Feasible ``Z_AB`` for the diamond program of ``id - A_p`` with ``tr_B Z = p 1``."""
    from ..channels import amplitude_damping

    p = _check_p(p, lo_open=True)
    q = 1 - np.sqrt(1 - p)
    z = np.zeros((4, 4))
    z[0, 0] = q * q / p
    z[1, 1] = p - q * q / p
    z[3, 3] = p
    z[0, 3] = z[3, 0] = q
    gamma = la.max_entangled(2, normalized=False)
    a = choi_from_kraus(amplitude_damping(p)).matrix
    mineig = lambda x: float(np.linalg.eigvalsh(la.hermitize(x))[0])
    tr_b = la.ptrace(z, (2, 2), [0])
    checks = {
        "Z >= 0": -mineig(z),
        "Z >= gamma - A_p": -mineig(z - (gamma - a)),
        "tr_B Z = p 1": float(np.max(np.abs(tr_b - p * np.eye(2)))),
    }
    value = float(np.max(np.linalg.eigvalsh(la.hermitize(tr_b))))
    return Certificate(value, {"Z": z}, checks)

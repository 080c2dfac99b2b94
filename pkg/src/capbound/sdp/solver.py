"""Dense primal-dual interior-point solver for small semidefinite programs.

Problems are taken in the standard form

    minimize    c^T x
    subject to  A x = b,   x_k in S_+  for every PSD block k,

where ``x`` stacks the svec coordinates of each PSD block followed by free
scalars.  Internally the method works on the homogeneous self-dual embedding
of the equivalent cone program ``G x + s = h`` with ``G = -[I 0]``, ``h = 0``,
uses Nesterov-Todd scaling, Mehrotra predictor-corrector steps, and solves
the NT-scaled Newton (KKT) system by dense LU with iterative refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

SQRT2 = math.sqrt(2.0)
CERT_TOL = 1e-7  # contract level reported as "optimal" when an iterate stalls


# ---------------------------------------------------------------------------
# svec coordinates: off-diagonals scaled by sqrt(2) so <svec A, svec B> = tr(AB)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _svec_index(k: int):
    iu, ju = np.triu_indices(k)
    scale = np.where(iu == ju, 1.0, SQRT2)
    q = np.zeros((len(iu), k * k))
    rows = np.arange(len(iu))
    q[rows, iu * k + ju] = 1.0 / scale
    q[rows, ju * k + iu] = np.where(iu == ju, 1.0, 1.0 / SQRT2)
    return iu, ju, scale, q


def svec_dim(k: int) -> int:
    return k * (k + 1) // 2


def svec(m: np.ndarray) -> np.ndarray:
    iu, ju, scale, _ = _svec_index(m.shape[0])
    return m[iu, ju] * scale


def smat(v: np.ndarray, k: int | None = None) -> np.ndarray:
    if k is None:
        k = int(round((math.sqrt(8 * len(v) + 1) - 1) / 2))
    iu, ju, scale, _ = _svec_index(k)
    m = np.zeros((k, k))
    vals = v / scale
    m[iu, ju] = vals
    m[ju, iu] = vals
    return m


def _quad_matrix(p: np.ndarray) -> np.ndarray:
    """svec representation of ``X -> P X P`` (``P`` symmetric)."""
    _, _, _, q = _svec_index(p.shape[0])
    return q @ np.kron(p, p) @ q.T


def _quad_matrix_pair(m: np.ndarray) -> np.ndarray:
    """svec representation of ``X -> M X M^T``."""
    _, _, _, q = _svec_index(m.shape[0])
    return q @ np.kron(m, m) @ q.T


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass
class SdpSolution:
    """Outcome of :func:`solve_standard`.

    ``x`` holds primal block coordinates (taken from the cone slack, so blocks
    are PSD) and free scalars; ``y`` are equality multipliers with
    ``c - A^T y = (svec Z, 0)`` and ``z_blocks`` the dual slack matrices.
    """

    status: str
    primal_value: float
    dual_value: float
    x: np.ndarray
    y: np.ndarray
    z_blocks: list
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    infeasibility: str | None = None
    block_values: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def certified(self, tol: float = CERT_TOL) -> bool:
        """Duality gap and primal residual meet the given tolerance."""
        return (self.status == "optimal"
                and abs(self.primal_value - self.dual_value) <= tol * (1 + abs(self.primal_value))
                and self.primal_residual <= tol)


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------


def _independent_rows(a: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Drop linearly dependent equality rows; report inconsistency."""
    if a.shape[0] == 0:
        return np.arange(0), True
    _, r, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * max(diag[0], 1.0)))
    keep = np.sort(piv[:rank])
    drop = np.setdiff1d(np.arange(a.shape[0]), keep)
    consistent = True
    if len(drop):
        coef, *_ = np.linalg.lstsq(a[keep].T, a[drop].T, rcond=None)
        mismatch = np.max(np.abs(coef.T @ b[keep] - b[drop]))
        consistent = mismatch <= 1e-8 * max(1.0, np.max(np.abs(b)))
    return keep, consistent


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


class _Blocks:
    """Bookkeeping for the block part of the variable vector."""

    def __init__(self, sizes):
        self.sizes = list(sizes)
        self.dims = [svec_dim(k) for k in self.sizes]
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        self.total = int(self.offsets[-1])
        self.degree = int(sum(self.sizes))

    def split(self, v):
        return [v[self.offsets[i]:self.offsets[i + 1]] for i in range(len(self.sizes))]

    def to_mats(self, v):
        return [smat(part, k) for part, k in zip(self.split(v), self.sizes)]

    def to_vec(self, mats):
        if not mats:
            return np.zeros(0)
        return np.concatenate([svec(m) for m in mats])


def _sym_factor(m):
    w, v = np.linalg.eigh(m)
    w = np.maximum(w, 1e-300)
    return v * np.sqrt(w)


def _nt_scaling(s, z):
    """Per-block NT scaling: returns R with R^T z R = diag(lam) = R^-1 s R^-T."""
    ls = _sym_factor(s)
    lz = _sym_factor(z)
    u, lam, vt = np.linalg.svd(lz.T @ ls)
    r = ls @ vt.T / np.sqrt(lam)
    rinv = (np.sqrt(lam)[:, None] * vt) @ np.linalg.inv(ls)
    return r, rinv, lam


def _max_step(lam, d):
    """Largest alpha with diag(lam) + alpha*d PSD."""
    isq = 1.0 / np.sqrt(lam)
    w = np.linalg.eigvalsh(isq[:, None] * d * isq[None, :])
    lo = w[0]
    return np.inf if lo >= 0 else -1.0 / lo


def solve_standard(a, b, c, block_sizes, n_free: int, tol: float = 1e-8,
                   max_iter: int = 200) -> SdpSolution:
    """Solve ``min c.x  s.t.  A x = b``, block parts of ``x`` PSD.

    :param a: dense ``(p, n)`` equality matrix over svec block coordinates then free scalars
    :param b: right-hand side of length ``p``
    :param c: objective of length ``n``
    :param block_sizes: side length of each PSD block, in the order used by ``x``
    :param n_free: number of trailing unconstrained scalars
    :param tol: feasibility and relative gap target
    """
    a = np.asarray(a, dtype=float).reshape(-1, len(c))
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    blocks = _Blocks(block_sizes)
    nb = blocks.total
    n = nb + n_free
    if a.shape[1] != n:
        raise ValueError(f"constraint matrix has {a.shape[1]} columns, expected {n}")
    a_orig, b_orig = a, b

    keep, consistent = _independent_rows(a, b)
    a, b = a[keep], b[keep]
    if not consistent:
        return _finish("infeasible", a_orig, b_orig, c, blocks, n_free,
                       np.zeros(n), np.zeros(a_orig.shape[0]), [np.eye(k) for k in blocks.sizes],
                       [np.zeros((k, k)) for k in blocks.sizes], 0, infeasibility="primal")
    # row equilibration
    norms = np.linalg.norm(a, axis=1)
    norms[norms == 0] = 1.0
    a = a / norms[:, None]
    b = b / norms
    p = a.shape[0]
    a_b, a_f = a[:, :nb], a[:, nb:]

    bnorm = max(1.0, np.linalg.norm(b))
    cnorm = max(1.0, np.linalg.norm(c))

    x = np.concatenate([blocks.to_vec([np.eye(k) for k in blocks.sizes]), np.zeros(n_free)])
    y = np.zeros(p)
    s = [np.eye(k) for k in blocks.sizes]
    z = [np.eye(k) for k in blocks.sizes]
    tau, kappa = 1.0, 1.0
    deg = blocks.degree

    status = "max_iter"
    infeas = None
    it = 0
    stall = 0
    for it in range(max_iter + 1):
        sv = blocks.to_vec(s)
        zv = blocks.to_vec(z)
        zext = np.concatenate([zv, np.zeros(n_free)])
        r_x = a.T @ y - zext + c * tau
        r_y = -a @ x + b * tau
        r_z = x[:nb] - sv
        r_t = -c @ x - b @ y - kappa

        gap_raw = float(sv @ zv)
        mu = (gap_raw + tau * kappa) / (deg + 1)
        pcost = c @ x / tau
        dcost = -b @ y / tau
        pres = max(np.linalg.norm(r_y), np.linalg.norm(r_z)) / tau / bnorm
        dres = np.linalg.norm(r_x) / tau / cnorm
        gap = gap_raw / tau ** 2
        scale = 1.0 + abs(pcost)
        if (pres <= tol and dres <= tol and gap <= tol * scale
                and abs(pcost - dcost) <= tol * scale):
            status = "optimal"
            break
        # infeasibility certificates
        by = b @ y
        if by < 0:
            pinf = np.linalg.norm(a.T @ y - zext) / cnorm / (-by)
            if pinf <= tol:
                status, infeas = "infeasible", "primal"
                break
        cx = c @ x
        if cx < 0:
            dinf = max(np.linalg.norm(a @ x) / bnorm, np.linalg.norm(x[:nb] - sv)) / (-cx)
            if dinf <= tol:
                status, infeas = "infeasible", "dual"
                break
        if it == max_iter or stall >= 3:
            if pres <= CERT_TOL and dres <= CERT_TOL and gap <= CERT_TOL * scale \
                    and abs(pcost - dcost) <= CERT_TOL * scale:
                status = "optimal"
            break

        # scaling
        scal = [_nt_scaling(si, zi) for si, zi in zip(s, z)]
        hmats = [_quad_matrix(r @ r.T) for r, _, _ in scal]
        # W^-T in svec coordinates, per block: X -> R^-1 X R^-T
        winvt = [_quad_matrix_pair(rinv) for _, rinv, _ in scal]
        # scaled KKT in (ux, uy, W uz); much better conditioned than A H A^T
        dim = n + p + nb
        kkt = np.zeros((dim, dim))
        kkt[:n, n:n + p] = a.T
        kkt[n:n + p, :n] = -a
        kkt[n + p:, n + p:] = np.eye(nb)
        for i, wk in enumerate(winvt):
            sl = slice(blocks.offsets[i], blocks.offsets[i + 1])
            sz = slice(n + p + blocks.offsets[i], n + p + blocks.offsets[i + 1])
            kkt[sl, sz] = -wk.T
            kkt[sz, sl] = wk
        try:
            lu = scipy.linalg.lu_factor(kkt, check_finite=False)
        except (ValueError, np.linalg.LinAlgError):
            break
        if not np.all(np.isfinite(lu[0])):
            break

        def apply_blocks(mats, v, transpose=False):
            out = np.empty_like(v)
            for i, mk in enumerate(mats):
                sl = slice(blocks.offsets[i], blocks.offsets[i + 1])
                out[sl] = (mk.T if transpose else mk) @ v[sl]
            return out

        def kkt_op(ux, uy, uz):
            return (a.T @ uy - np.concatenate([uz, np.zeros(n_free)]),
                    -a @ ux,
                    ux[:nb] + apply_blocks(hmats, uz))

        def kkt_raw(rx, ry, rz):
            rhs = np.concatenate([rx, ry, apply_blocks(winvt, rz)])
            sol = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
            # uz = W^-1 (W uz), and W^-1 is the transpose of W^-T
            return sol[:n], sol[n:n + p], apply_blocks(winvt, sol[n + p:], transpose=True)

        def kkt_solve(rx, ry, rz):
            ux, uy, uz = kkt_raw(rx, ry, rz)
            for _ in range(2):
                ex, ey, ez = kkt_op(ux, uy, uz)
                dx, dy, dz = kkt_raw(rx - ex, ry - ey, rz - ez)
                ux, uy, uz = ux + dx, uy + dy, uz + dz
            return ux, uy, uz

        vx, vy, vz = kkt_solve(c, b, np.zeros(nb))
        vtv = c @ vx + b @ vy

        def direction(sig, cs_list, c_kappa):
            tx, ty, tz, tt = -(1 - sig) * r_x, -(1 - sig) * r_y, -(1 - sig) * r_z, -(1 - sig) * r_t
            # lam \ cs, pulled back by W^T
            inv_parts = []
            for (r, _, lam), cs in zip(scal, cs_list):
                u = 2.0 * cs / (lam[:, None] + lam[None, :])
                inv_parts.append(r @ u @ r.T)
            rz = tz + blocks.to_vec(inv_parts)
            rt = tt + c_kappa / tau
            ux, uy, uz = kkt_solve(tx, ty, rz)
            dtau = (rt + c @ ux + b @ uy) / (kappa / tau + vtv)
            dx, dy, dzv = ux - vx * dtau, uy - vy * dtau, uz - vz * dtau
            dz_m = blocks.to_mats(dzv)
            ds_m = []
            ds_sc, dz_sc = [], []
            for (r, rinv, lam), wi, dzi in zip(scal, inv_parts, dz_m):
                p_ = r @ r.T
                dsi = wi - p_ @ dzi @ p_
                dsi = (dsi + dsi.T) / 2
                ds_m.append(dsi)
                t1 = rinv @ dsi @ rinv.T
                t2 = r.T @ dzi @ r
                ds_sc.append((t1 + t1.T) / 2)
                dz_sc.append((t2 + t2.T) / 2)
            dkappa = (c_kappa - kappa * dtau) / tau
            alpha = np.inf
            for (_, _, lam), d1, d2 in zip(scal, ds_sc, dz_sc):
                alpha = min(alpha, _max_step(lam, d1), _max_step(lam, d2))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return dx, dy, dz_m, ds_m, dtau, dkappa, alpha, ds_sc, dz_sc

        lam_sq = [-np.diag(lam ** 2) for _, _, lam in scal]
        aff = direction(0.0, lam_sq, -tau * kappa)
        alpha_aff = min(1.0, aff[6])
        sigma = (1.0 - alpha_aff) ** 3
        cs = []
        for (_, _, lam), d1, d2 in zip(scal, aff[7], aff[8]):
            corr = (d1 @ d2 + d2 @ d1) / 2
            cs.append(-np.diag(lam ** 2) + sigma * mu * np.eye(len(lam)) - corr)
        ck = -tau * kappa + sigma * mu - aff[4] * aff[5]
        dx, dy, dz_m, ds_m, dtau, dkappa, alpha, _, _ = direction(sigma, cs, ck)
        step = min(1.0, 0.99 * alpha)
        stall = stall + 1 if step < 1e-7 else 0

        x = x + step * dx
        y = y + step * dy
        s = [si + step * d for si, d in zip(s, ds_m)]
        z = [zi + step * d for zi, d in zip(z, dz_m)]
        tau = tau + step * dtau
        kappa = kappa + step * dkappa

    if status == "infeasible":
        return _finish(status, a_orig, b_orig, c, blocks, n_free, x, y, s, z, it,
                       infeasibility=infeas, tau=None)
    return _finish(status, a_orig, b_orig, c, blocks, n_free, x, y, s, z, it,
                   tau=tau, rows=(keep, norms))


def _finish(status, a_orig, b_orig, c, blocks, n_free, x, y, s, z, it,
            infeasibility=None, tau=1.0, rows=None):
    nb = blocks.total
    t = 1.0 if tau is None else tau
    s_bar = [(si + si.T) / (2 * t) for si in s]
    z_bar = [(zi + zi.T) / (2 * t) for zi in z]
    x_out = np.concatenate([blocks.to_vec(s_bar), x[nb:] / t])
    y_full = np.zeros(a_orig.shape[0])
    if rows is not None:
        keep, norms = rows
        # undo equilibration; dropped (dependent) rows get zero multipliers
        y_full[keep] = -y / t / norms
    pval = float(c @ x_out)
    dval = float(b_orig @ y_full)
    pres = float(np.max(np.abs(a_orig @ x_out - b_orig))) if a_orig.shape[0] else 0.0
    zext = np.concatenate([blocks.to_vec(z_bar), np.zeros(n_free)])
    dres = float(np.max(np.abs(c - a_orig.T @ y_full - zext))) if len(c) else 0.0
    gap = float(blocks.to_vec(s_bar) @ blocks.to_vec(z_bar)) if nb else 0.0
    if status == "infeasible":
        pval = dval = math.nan
    return SdpSolution(status=status, primal_value=pval, dual_value=dval, x=x_out, y=y_full,
                       z_blocks=z_bar, iterations=it, primal_residual=pres, dual_residual=dres,
                       gap=gap, infeasibility=infeasibility)

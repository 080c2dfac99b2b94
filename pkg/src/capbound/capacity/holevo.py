"""Holevo information: ensemble evaluation, multi-start maximization and closed forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .. import linalg as la
from ..channels import Channel, apply
from ..errors import CovarianceError, DimensionError, InvalidStateError, ParameterError

DEFAULT_RESTARTS = 32


@dataclass(frozen=True)
class Ensemble:
    """Probabilities and pure input states (rows of ``states``)."""

    probs: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        if len(probs) != states.shape[0]:
            raise DimensionError("one probability per state is required")
        if np.any(probs < -1e-12) or abs(probs.sum() - 1) > 1e-10:
            raise InvalidStateError("ensemble probabilities are not on the simplex")
        norms = np.linalg.norm(states, axis=1)
        if np.max(np.abs(norms - 1)) > 1e-10:
            raise InvalidStateError("ensemble states must be unit vectors")
        if states.shape[0] > states.shape[1] ** 2:
            raise DimensionError(f"{states.shape[0]} states exceed dim^2 = {states.shape[1] ** 2}")
        object.__setattr__(self, "probs", np.clip(probs, 0, None))
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self):
        return len(self.probs)

    def density_matrices(self) -> np.ndarray:
        return self.states[:, :, None] * self.states.conj()[:, None, :]

    def cq_state(self) -> la.MultipartiteOperator:
        """``sum_x p(x) |x><x| (x) psi_x`` with labels ``(X, A)``."""
        k, d = self.states.shape
        rho = np.zeros((k * d, k * d), dtype=complex)
        for x, (p, r) in enumerate(zip(self.probs, self.density_matrices())):
            rho[x * d:(x + 1) * d, x * d:(x + 1) * d] = p * r
        return la.MultipartiteOperator(rho, (k, d), ("X", "A"))


# ---------------------------------------------------------------------------
# Fast batch entropies
# ---------------------------------------------------------------------------


def _entropy_batch(m: np.ndarray) -> np.ndarray:
    """Von Neumann entropies (bits) of a stack of Hermitian PSD matrices."""
    if m.shape[-1] == 2:
        a, d = m[..., 0, 0].real, m[..., 1, 1].real
        b2 = np.abs(m[..., 0, 1]) ** 2
        half = (a + d) / 2
        disc = np.sqrt(np.maximum(((a - d) / 2) ** 2 + b2, 0.0))
        w = np.stack([half + disc, half - disc], axis=-1)
    else:
        w = np.linalg.eigvalsh(m)
    w = np.where(w > la.EIGEN_CLAMP, w, 1.0)  # log(1) = 0 drops clamped eigenvalues
    return -np.sum(w * np.log2(w), axis=-1)


def _channel_map(ch: Channel):
    """Return a function mapping a stack of input density matrices to outputs."""
    sup = ch.superoperator()
    d_in, d_out = ch.dim_in, ch.dim_out

    def fn(rhos):
        k = rhos.shape[0]
        return (rhos.reshape(k, d_in * d_in) @ sup.T).reshape(k, d_out, d_out)

    return fn


def holevo_ensemble(ch: Channel, e: Ensemble) -> float:
    """``S(sum p N(psi)) - sum p S(N(psi))`` in bits."""
    if e.dim != ch.dim_in:
        raise DimensionError(f"ensemble states have dimension {e.dim}, channel input is {ch.dim_in}")
    outs = np.stack([apply(ch, r) for r in e.density_matrices()])
    avg = np.tensordot(e.probs, outs, axes=1)
    value = float(_entropy_batch(avg[None])[0] - e.probs @ _entropy_batch(outs))
    return min(max(value, 0.0), float(np.log2(ch.dim_out)))  # clip roundoff only


# ---------------------------------------------------------------------------
# Ensemble parametrization
# ---------------------------------------------------------------------------


def _states_from_angles(ang: np.ndarray, d: int) -> np.ndarray:
    """``(k, 2(d-1))`` angles -> ``(k, d)`` unit vectors.

    First ``d-1`` angles are hyperspherical polar angles for the moduli, the
    remaining ``d-1`` are relative phases.
    """
    k = ang.shape[0]
    theta, phi = ang[:, :d - 1], ang[:, d - 1:]
    mod = np.ones((k, d))
    s = np.ones(k)
    for j in range(d - 1):
        mod[:, j] = s * np.cos(theta[:, j])
        s = s * np.sin(theta[:, j])
    mod[:, d - 1] = s
    phase = np.concatenate([np.ones((k, 1)), np.exp(1j * phi)], axis=1)
    return mod * phase


def _softmax(v):
    w = np.exp(v - v.max())
    return w / w.sum()


def _unpack(theta, k, d):
    probs = _softmax(theta[:k])
    states = _states_from_angles(theta[k:].reshape(k, 2 * (d - 1)), d)
    return probs, states


def bloch_affine(ch: Channel):
    """Qubit channel as ``r -> M r + t`` on Bloch vectors."""
    if (ch.dim_in, ch.dim_out) != (2, 2):
        raise DimensionError("Bloch representation needs a qubit-to-qubit channel")
    paulis = (la.PAULI_X, la.PAULI_Y, la.PAULI_Z)
    m = np.array([[0.5 * np.real(np.trace(si @ apply(ch, sj))) for sj in paulis] for si in paulis])
    t = np.array([0.5 * np.real(np.trace(si @ apply(ch, la.PAULI_I))) for si in paulis])
    return m, t


def _h_bloch(r):
    """Entropy (bits) of qubit states with Bloch-vector lengths ``r``."""
    lam = np.maximum(np.concatenate([1 + r, 1 - r]) * 0.5, la.EIGEN_CLAMP)
    return -(lam * np.log2(lam)).reshape(2, -1).sum(axis=0)


def _qubit_objective(avg_ch, term_ch, k):
    m1, t1 = bloch_affine(avg_ch)
    m2, t2 = bloch_affine(term_ch)
    r = np.empty((k, 3))

    def value(theta):
        w = np.exp(theta[:k] - theta[:k].max())
        p = w / w.sum()
        th, ph = theta[k:2 * k], theta[2 * k:]
        st = np.sin(th)
        r[:, 0] = st * np.cos(ph)
        r[:, 1] = st * np.sin(ph)
        r[:, 2] = np.cos(th)
        avg = m1 @ (p @ r) + t1
        outs = r @ m2.T + t2
        lens = np.sqrt(np.append((outs * outs).sum(axis=1), avg @ avg))
        h = _h_bloch(lens)
        return h[-1] - p @ h[:-1]

    def unpack(theta):
        p = _softmax(theta[:k])
        th, ph = theta[k:2 * k], theta[2 * k:]
        return p, _bloch_states(th, ph)

    return value, unpack


def _generic_objective(avg_ch, term_ch, k):
    d = avg_ch.dim_in
    f_avg, f_term = _channel_map(avg_ch), _channel_map(term_ch)

    def value(theta):
        probs, states = _unpack(theta, k, d)
        rhos = states[:, :, None] * states.conj()[:, None, :]
        avg_in = np.tensordot(probs, rhos, axes=1)
        return _entropy_batch(f_avg(avg_in[None]))[0] - probs @ _entropy_batch(f_term(rhos))

    return value, lambda theta: _unpack(theta, k, d)


def maximize_entropy_difference(avg_ch: Channel, term_ch: Channel, restarts: int = DEFAULT_RESTARTS,
                                seed: int = 0, cardinality: int | None = None):
    """Maximize ``S(avg_ch(rho_bar)) - sum p S(term_ch(psi_x))`` over pure-state ensembles.

    With ``avg_ch = term_ch = N`` this is the Holevo quantity of ``N``.  Restart
    ``i`` always starts from the ``i``-th draw of the seeded stream, so adding
    restarts never lowers the result.

    :returns: ``(value, Ensemble)``
    """
    d = avg_ch.dim_in
    if term_ch.dim_in != d:
        raise DimensionError("both channels must share the input space")
    k = cardinality or d * d
    npar = k + k * 2 * (d - 1)
    qubit = (avg_ch.dim_out, term_ch.dim_out, d) == (2, 2, 2)
    value, unpack = (_qubit_objective if qubit else _generic_objective)(avg_ch, term_ch, k)
    rng = np.random.default_rng(seed)

    # a second simplex rebuilt around the first result un-sticks collapsed simplices
    # more cheaply than one long run; the adaptive variant pays off only in higher dimension
    opts = {"xatol": 1e-6, "fatol": 1e-11, "adaptive": not qubit,
            "maxfev": (34 if qubit else 200) * npar}
    best_val, best_theta = -np.inf, None
    for _ in range(restarts):
        x = np.concatenate([rng.normal(0, 0.5, k), rng.uniform(0, 2 * np.pi, npar - k)])
        for _stage in range(2):
            res = minimize(lambda t: -value(t), x, method="Nelder-Mead", options=opts)
            x = res.x
        if -res.fun > best_val:  # strict: ties keep the earlier restart
            best_val, best_theta = -res.fun, res.x
    probs, states = unpack(best_theta)
    states = states / np.linalg.norm(states, axis=1, keepdims=True)
    return float(best_val), Ensemble(probs / probs.sum(), states)


def holevo_information(ch: Channel, restarts: int = DEFAULT_RESTARTS, seed: int = 0):
    """Multi-start lower bound on the Holevo information.

    :returns: ``(value, Ensemble)``; the value is ``holevo_ensemble`` of the returned ensemble
    """
    if ch.dim_in > 4:
        raise DimensionError("ensemble search is limited to input dimension <= 4")
    _, ens = maximize_entropy_difference(ch, ch, restarts=restarts, seed=seed)
    return holevo_ensemble(ch, ens), ens


# ---------------------------------------------------------------------------
# Minimum output entropy and the one-design formula
# ---------------------------------------------------------------------------


def _bloch_states(theta, phi):
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def _line_min(fn, x, h):
    """Golden-section around ``x``; flat or one-sided brackets fall back to a bounded search."""
    try:
        return minimize_scalar(fn, bracket=(x - h, x, x + h), method="golden", tol=1e-10)
    except ValueError:
        return minimize_scalar(fn, bounds=(x - h, x + h), method="bounded", options={"xatol": 1e-10})


def min_output_entropy(ch: Channel, restarts: int = 16, seed: int = 0) -> float:
    """Minimum of ``S(N(psi))`` over pure inputs, in bits."""
    fn = _channel_map(ch)

    def ent(states):
        states = np.atleast_2d(states)
        rhos = states[:, :, None] * states.conj()[:, None, :]
        return _entropy_batch(fn(rhos))

    if ch.dim_in == 2:
        th = np.linspace(0, np.pi, 64)
        ph = np.linspace(0, 2 * np.pi, 32, endpoint=False)
        tt, pp = np.meshgrid(th, ph, indexing="ij")
        vals = ent(_bloch_states(tt.ravel(), pp.ravel())).reshape(tt.shape)
        best = np.inf
        # refine the few best grid points by cyclic golden-section in each angle
        for flat in np.argsort(vals, axis=None)[:4]:
            i, j = np.unravel_index(flat, vals.shape)
            t, p = th[i], ph[j]
            ht, hp = th[1] - th[0], ph[1] - ph[0]
            cur = vals[i, j]
            for _ in range(50):
                rt = _line_min(lambda x: ent(_bloch_states(np.array([x]), np.array([p])))[0], t, ht)
                if rt.fun <= cur:
                    t = rt.x
                rp = _line_min(lambda x: ent(_bloch_states(np.array([t]), np.array([x])))[0], p, hp)
                if rp.fun <= cur:
                    p = rp.x
                new = ent(_bloch_states(np.array([t]), np.array([p])))[0]
                ht, hp = ht / 2, hp / 2
                if cur - new < 1e-12 and ht < 1e-6:
                    cur = min(cur, new)
                    break
                cur = min(cur, new)
            best = min(best, cur)
        return float(max(best, 0.0))
    if ch.dim_in > 4:
        raise DimensionError("minimum output entropy search is limited to input dimension <= 4")
    d = ch.dim_in
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(restarts):
        x0 = rng.uniform(0, 2 * np.pi, 2 * (d - 1))
        res = minimize(lambda a: ent(_states_from_angles(a[None], d))[0], x0, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 4000})
        best = min(best, res.fun)
    return float(max(best, 0.0))


def holevo_one_design(ch: Channel, g, cov_tol: float = 1e-6) -> float:
    """``S(N(pi)) - min S(N(psi))`` for a channel covariant under a one-design input representation."""
    from ..symmetry import covariance_parameter

    if not g.input_is_one_design():
        raise CovarianceError(f"input representation {g.name!r} is not a unitary one-design")
    eps = covariance_parameter(ch, g)
    if eps > cov_tol:
        raise CovarianceError(f"channel is not covariant under {g.name!r} (covariance parameter {eps:.3g})")
    out_pi = apply(ch, la.maximally_mixed(ch.dim_in))
    return float(la.von_neumann_entropy(out_pi) - min_output_entropy(ch))


# ---------------------------------------------------------------------------
# Closed form for amplitude damping
# ---------------------------------------------------------------------------


def _ampdamp_objective(q, p):
    h = la.binary_entropy
    root = np.sqrt(max(1 - 4 * p * (1 - p) * q * q, 0.0))
    return h((1 - p) * q) - h((1 + root) / 2)


def holevo_ampdamp_closed_form(p: float, grid: int = 201) -> float:
    """Maximize the one-parameter Holevo formula for amplitude damping over ``q in [0, 1]``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p={p} outside [0, 1]")
    qs = np.linspace(0, 1, grid)
    vals = np.array([_ampdamp_objective(q, p) for q in qs])
    i = int(np.argmax(vals))  # first maximizer: ties go to smaller q
    if i == 0 or i == grid - 1:
        lo, hi = (qs[0], qs[1]) if i == 0 else (qs[-2], qs[-1])
        res = minimize_scalar(lambda q: -_ampdamp_objective(q, p), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        return float(max(vals[i], -res.fun))
    res = minimize_scalar(lambda q: -_ampdamp_objective(q, p), bracket=(qs[i - 1], qs[i], qs[i + 1]),
                          method="golden", tol=1e-10)
    return float(max(vals[i], -res.fun))

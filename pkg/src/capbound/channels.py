"""Quantum channels in Kraus form and their Choi / Stinespring / complementary forms.

Choi convention: ``N_AB = (id_A (x) N)(gamma_AA')`` with the unnormalized
maximally entangled operator ``gamma``; the first tensor factor is the input
copy ``A``.  Two channels are equal when their Choi operators agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionError, InvalidChannelError, ParameterError

TP_TOL = 1e-9
CHOI_TOL = 1e-9
KRAUS_CUTOFF = 1e-10
EQUALITY_TOL = 1e-8


@dataclass(frozen=True)
class Channel:
    """CPTP map ``B(C^dim_in) -> B(C^dim_out)`` given by Kraus operators."""

    dim_in: int
    dim_out: int
    kraus: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        ops = tuple(la.as_matrix(k) for k in self.kraus)
        if not ops:
            raise InvalidChannelError("Kraus list is empty")
        for k in ops:
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionError(f"Kraus operator of shape {k.shape}, expected {(self.dim_out, self.dim_in)}")
        if len(ops) > self.dim_in * self.dim_out:
            raise InvalidChannelError(f"{len(ops)} Kraus operators exceed dim_in*dim_out = {self.dim_in * self.dim_out}")
        gram = sum(la.dagger(k) @ k for k in ops)
        dev = np.max(np.abs(gram - np.eye(self.dim_in)))
        if dev > TP_TOL:
            raise InvalidChannelError(f"Kraus operators are not trace preserving (deviation {dev:.3g})")
        object.__setattr__(self, "kraus", ops)

    @property
    def kraus_array(self) -> np.ndarray:
        return np.stack(self.kraus)

    def __call__(self, rho):
        return apply(self, rho)

    def superoperator(self) -> np.ndarray:
        """Matrix ``S`` with ``vec(N(rho)) = S vec(rho)`` for row-major ``vec``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)


def _make(dim_in, dim_out, kraus, name="") -> Channel:
    ops = [la.as_matrix(k) for k in kraus]
    nonzero = [k for k in ops if np.linalg.norm(k) > 1e-15]
    ops = nonzero or ops[:1]
    if len(ops) > dim_in * dim_out:
        return kraus_from_choi(_choi_matrix(ops, dim_in, dim_out), dim_in, dim_out, name=name)
    return Channel(dim_in, dim_out, tuple(ops), name)


@dataclass(frozen=True)
class ChoiOperator:
    """Choi operator ``N_AB``, PSD with ``tr_B N_AB = 1_A``."""

    matrix: np.ndarray
    dim_in: int
    dim_out: int
    tol: float = field(default=CHOI_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = la.as_matrix(self.matrix)
        n = self.dim_in * self.dim_out
        if m.shape != (n, n):
            raise DimensionError(f"Choi matrix shape {m.shape} does not match {self.dim_in}x{self.dim_out}")
        if not la.is_hermitian(m, self.tol):
            raise InvalidChannelError("Choi matrix is not Hermitian")
        m = la.hermitize(m)
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -self.tol:
            raise InvalidChannelError(f"Choi matrix is not PSD (min eigenvalue {lo:.3g})")
        marg = la.ptrace(m, (self.dim_in, self.dim_out), [0])
        dev = np.max(np.abs(marg - np.eye(self.dim_in)))
        if dev > self.tol:
            raise InvalidChannelError(f"tr_B of Choi matrix differs from identity by {dev:.3g}")
        object.__setattr__(self, "matrix", m)

    @property
    def op(self) -> la.MultipartiteOperator:
        return la.MultipartiteOperator(self.matrix, (self.dim_in, self.dim_out), ("A", "B"))

    @property
    def dims(self):
        return (self.dim_in, self.dim_out)


@dataclass(frozen=True)
class StinespringIsometry:
    """Isometry ``V: A -> B (x) E`` (output factor ordering ``B, E``)."""

    v: np.ndarray
    dim_in: int
    dim_out: int
    dim_env: int

    def __post_init__(self):
        v = la.as_matrix(self.v)
        if v.shape != (self.dim_out * self.dim_env, self.dim_in):
            raise DimensionError(f"isometry shape {v.shape} inconsistent with dims")
        dev = np.max(np.abs(la.dagger(v) @ v - np.eye(self.dim_in)))
        if dev > TP_TOL:
            raise InvalidChannelError(f"V is not an isometry (deviation {dev:.3g})")
        object.__setattr__(self, "v", v)

    def as_channel(self) -> Channel:
        """The isometric channel ``rho -> V rho V^dagger`` onto ``BE``."""
        return Channel(self.dim_in, self.dim_out * self.dim_env, (self.v,))


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------


def _choi_matrix(kraus, dim_in, dim_out) -> np.ndarray:
    vecs = np.stack([np.asarray(k).T.reshape(-1) for k in kraus], axis=1)
    return la.hermitize(vecs @ la.dagger(vecs))


def choi_from_kraus(ch: Channel) -> ChoiOperator:
    return ChoiOperator(_choi_matrix(ch.kraus, ch.dim_in, ch.dim_out), ch.dim_in, ch.dim_out)


def kraus_from_choi(choi, dim_in: int | None = None, dim_out: int | None = None, name: str = "",
                    cutoff: float = KRAUS_CUTOFF) -> Channel:
    """Minimal Kraus decomposition from the Choi eigendecomposition.

    Accepts a :class:`ChoiOperator` or a raw matrix together with its dimensions.
    Eigenvalues at or below ``cutoff`` are discarded.
    """
    if isinstance(choi, ChoiOperator):
        mat, dim_in, dim_out = choi.matrix, choi.dim_in, choi.dim_out
    else:
        mat = ChoiOperator(la.as_matrix(choi), dim_in, dim_out).matrix
    w, v = np.linalg.eigh(mat)
    kraus = []
    for lam, vec in zip(w[::-1], v.T[::-1]):
        if lam <= cutoff:
            break
        kraus.append(np.sqrt(lam) * vec.reshape(dim_in, dim_out).T)
    if not kraus:
        raise InvalidChannelError("Choi matrix has no eigenvalue above the cutoff")
    return Channel(dim_in, dim_out, tuple(kraus), name)


def renormalize_choi(choi: ChoiOperator) -> ChoiOperator:
    """Clip negative eigenvalues and restore ``tr_B N_AB = 1`` exactly.

    Meant for Choi operators read off SDP solutions, which satisfy the
    constraints only to solver tolerance.  The correction ``T^(-1/2)`` acts on
    the input factor alone, so PPT-ness is preserved.
    """
    w, v = np.linalg.eigh(choi.matrix)
    mat = (v * np.clip(w, 0, None)) @ la.dagger(v)
    t = la.ptrace(mat, choi.dims, [0])
    tw, tv = np.linalg.eigh(la.hermitize(t))
    if np.min(tw) <= 0:
        raise InvalidChannelError("Choi operator has a singular input marginal")
    x = np.kron((tv / np.sqrt(tw)) @ la.dagger(tv), np.eye(choi.dim_out))
    return ChoiOperator(la.hermitize(x @ mat @ la.dagger(x)), choi.dim_in, choi.dim_out, tol=choi.tol)


def stinespring(ch: Channel) -> StinespringIsometry:
    """Stack the Kraus operators against an orthonormal environment basis."""
    k = ch.kraus_array
    nk = k.shape[0]
    v = np.transpose(k, (1, 0, 2)).reshape(ch.dim_out * nk, ch.dim_in)
    return StinespringIsometry(v, ch.dim_in, ch.dim_out, nk)


def complementary(ch: Channel) -> Channel:
    """Complementary channel onto the minimal environment of this Kraus list."""
    k = ch.kraus_array
    ops = [k[:, b, :] for b in range(ch.dim_out)]
    return _make(ch.dim_in, k.shape[0], ops, name=f"complementary({ch.name})" if ch.name else "")


def minimal(ch: Channel) -> Channel:
    """Equivalent channel with Kraus count equal to the Choi rank."""
    return kraus_from_choi(choi_from_kraus(ch), name=ch.name)


def channels_equal(n: Channel, m: Channel, tol: float = EQUALITY_TOL) -> bool:
    if (n.dim_in, n.dim_out) != (m.dim_in, m.dim_out):
        return False
    return bool(np.max(np.abs(choi_from_kraus(n).matrix - choi_from_kraus(m).matrix)) <= tol)


# ---------------------------------------------------------------------------
# Action
# ---------------------------------------------------------------------------


def apply(ch: Channel, rho) -> np.ndarray:
    rho = la.as_matrix(rho)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimensionError(f"input of shape {rho.shape}, channel expects {ch.dim_in}")
    out = sum(k @ rho @ la.dagger(k) for k in ch.kraus)
    return la.hermitize(out) if la.is_hermitian(rho, 1e-12) else out


def apply_to_subsystem(ch: Channel, op: la.MultipartiteOperator, sub: str,
                       new_label: str | None = None) -> la.MultipartiteOperator:
    """Apply ``ch`` to factor ``sub`` of ``op``; the factor keeps its label unless renamed."""
    pos = op.position(sub)
    if op.dims[pos] != ch.dim_in:
        raise DimensionError(f"subsystem {sub!r} has dimension {op.dims[pos]}, channel expects {ch.dim_in}")
    before = int(np.prod(op.dims[:pos]))
    after = int(np.prod(op.dims[pos + 1:]))
    out = 0
    for k in ch.kraus:
        big = np.kron(np.kron(np.eye(before), k), np.eye(after))
        out = out + big @ op.matrix @ la.dagger(big)
    dims = op.dims[:pos] + (ch.dim_out,) + op.dims[pos + 1:]
    labels = list(op.labels)
    if new_label is not None:
        labels[pos] = new_label
    return la.MultipartiteOperator(la.hermitize(out), dims, tuple(labels))


# ---------------------------------------------------------------------------
# Combinators
# ---------------------------------------------------------------------------


def compose(n: Channel, m: Channel) -> Channel:
    """``n o m``: apply ``m`` first, then ``n``."""
    if m.dim_out != n.dim_in:
        raise DimensionError(f"cannot compose: inner output {m.dim_out} != outer input {n.dim_in}")
    ops = [a @ b for a in n.kraus for b in m.kraus]
    return _make(m.dim_in, n.dim_out, ops)


def tensor(n: Channel, m: Channel) -> Channel:
    ops = [np.kron(a, b) for a in n.kraus for b in m.kraus]
    return _make(n.dim_in * m.dim_in, n.dim_out * m.dim_out, ops)


def convex_mix(chs: Sequence[Channel], probs: Sequence[float]) -> Channel:
    probs = np.asarray(probs, dtype=float)
    if len(chs) != len(probs) or not len(chs):
        raise ParameterError("need one probability per channel")
    if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-10:
        raise ParameterError(f"mixing weights {probs} are not on the simplex")
    d_in, d_out = chs[0].dim_in, chs[0].dim_out
    if any((c.dim_in, c.dim_out) != (d_in, d_out) for c in chs):
        raise DimensionError("all mixed channels must share input and output dimensions")
    ops = [np.sqrt(max(p, 0.0)) * k for p, c in zip(probs, chs) for k in c.kraus]
    return _make(d_in, d_out, ops)


# ---------------------------------------------------------------------------
# Named channels
# ---------------------------------------------------------------------------


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"noise parameter p={p} outside [0, 1]")
    return p


def identity(d: int = 2) -> Channel:
    return Channel(d, d, (np.eye(d, dtype=complex),), name=f"identity({d})")


def unitary_channel(u) -> Channel:
    u = la.as_matrix(u)
    return Channel(u.shape[1], u.shape[0], (u,), name="unitary")


def completely_depolarizing(d: int = 2) -> Channel:
    """``rho -> tr(rho) 1/d``."""
    ops = [np.outer(la.ket(i, d), la.ket(j, d)) / np.sqrt(d) for i in range(d) for j in range(d)]
    return Channel(d, d, tuple(ops), name=f"completely_depolarizing({d})")


def amplitude_damping(p: float) -> Channel:
    p = _check_p(p)
    k1 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    k2 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return _make(2, 2, [k1, k2], name=f"amplitude_damping({p:g})")


def depolarizing_qubit(p: float) -> Channel:
    """``(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``."""
    p = _check_p(p)
    ops = [np.sqrt(1 - p) * la.PAULI_I] + [np.sqrt(p / 3) * s for s in (la.PAULI_X, la.PAULI_Y, la.PAULI_Z)]
    return _make(2, 2, ops, name=f"depolarizing_qubit({p:g})")


def dephasing_z(p: float) -> Channel:
    """``(1-p) rho + p Z rho Z``."""
    p = _check_p(p)
    return _make(2, 2, [np.sqrt(1 - p) * la.PAULI_I, np.sqrt(p) * la.PAULI_Z], name=f"dephasing_z({p:g})")


def mix_ad_depol(p: float) -> Channel:
    """``p A_p + (1-p) D_p``."""
    p = _check_p(p)
    ch = convex_mix([amplitude_damping(p), depolarizing_qubit(p)], [p, 1 - p])
    return Channel(2, 2, ch.kraus, name=f"mix_ad_depol({p:g})")


def ad_after_dephasing(p: float) -> Channel:
    """``A_p o Z_p``."""
    p = _check_p(p)
    ch = compose(amplitude_damping(p), dephasing_z(p))
    return Channel(2, 2, ch.kraus, name=f"ad_after_dephasing({p:g})")


NAMED_FAMILIES = {
    "amplitude_damping": amplitude_damping,
    "depolarizing_qubit": depolarizing_qubit,
    "dephasing_z": dephasing_z,
    "mix_ad_depol": mix_ad_depol,
    "ad_after_dephasing": ad_after_dephasing,
}


def named_channel(name: str, p: float | None = None) -> Channel:
    if name == "identity":
        return identity(2 if p is None else int(p))
    if name == "completely_depolarizing":
        return completely_depolarizing(2 if p is None else int(p))
    try:
        family = NAMED_FAMILIES[name]
    except KeyError:
        raise ParameterError(f"unknown channel family {name!r}") from None
    if p is None:
        raise ParameterError(f"channel family {name!r} needs a parameter p")
    return family(p)


# ---------------------------------------------------------------------------
# Channel-spec files
# ---------------------------------------------------------------------------


def channel_from_spec(spec: dict) -> Channel:
    """Build a channel from ``{"named": ..., "p": ...}`` or ``{"dim_in", "dim_out", "kraus"}``."""
    if "named" in spec:
        return named_channel(spec["named"], spec.get("p"))
    try:
        dim_in, dim_out = int(spec["dim_in"]), int(spec["dim_out"])
        kraus = [la.matrix_from_literal(k) for k in spec["kraus"]]
    except KeyError as exc:
        raise InvalidChannelError(f"channel spec is missing field {exc.args[0]!r}") from None
    return Channel(dim_in, dim_out, tuple(kraus), name=spec.get("name", ""))


def channel_to_spec(ch: Channel) -> dict:
    return {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [la.matrix_to_literal(k) for k in ch.kraus],
    }


def load_channel(path) -> Channel:
    return channel_from_spec(json.loads(Path(path).read_text()))

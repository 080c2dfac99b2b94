"""Finite unitary representations, channel twirls and covariance parameters."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg as la
from .channels import Channel, ChoiOperator, choi_from_kraus
from .errors import DimensionError, InvalidChannelError

UNITARY_TOL = 1e-10


def _check_unitary(u, what):
    u = la.as_matrix(u)
    if u.shape[0] != u.shape[1] or np.max(np.abs(u @ la.dagger(u) - np.eye(u.shape[0]))) > UNITARY_TOL:
        raise InvalidChannelError(f"{what} is not unitary within {UNITARY_TOL:g}")
    return u


@dataclass(frozen=True)
class GroupRep:
    """Pairs ``(U_A(g), V_B(g))`` of input and output unitaries."""

    elements: tuple
    name: str = ""

    def __post_init__(self):
        if not self.elements:
            raise InvalidChannelError("a representation needs at least one element")
        pairs = []
        for i, (u, v) in enumerate(self.elements):
            pairs.append((_check_unitary(u, f"element {i} (input)"), _check_unitary(v, f"element {i} (output)")))
        d_in = {u.shape[0] for u, _ in pairs}
        d_out = {v.shape[0] for _, v in pairs}
        if len(d_in) != 1 or len(d_out) != 1:
            raise DimensionError("all elements must share input and output dimensions")
        object.__setattr__(self, "elements", tuple(pairs))

    def __len__(self):
        return len(self.elements)

    @property
    def dim_in(self) -> int:
        return self.elements[0][0].shape[0]

    @property
    def dim_out(self) -> int:
        return self.elements[0][1].shape[0]

    def input_is_one_design(self, tol: float = 1e-10) -> bool:
        """``avg_g U X U^dagger = tr(X) 1/d`` for every matrix unit ``X``."""
        d = self.dim_in
        us = np.stack([u for u, _ in self.elements])
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1
                avg = np.mean(us @ e @ la.dagger(us), axis=0)
                target = np.eye(d) / d if i == j else np.zeros((d, d))
                if np.max(np.abs(avg - target)) > tol:
                    return False
        return True


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    first = flat[np.argmax(np.abs(flat) > 1e-9)]
    return u * (abs(first) / first)


def pauli_rep() -> GroupRep:
    ops = (la.PAULI_I, la.PAULI_X, la.PAULI_Y, la.PAULI_Z)
    return GroupRep(tuple((p, p) for p in ops), name="pauli")


def clifford1_rep() -> GroupRep:
    """The 24 single-qubit Clifford unitaries modulo phase, by closure of ``H`` and ``S``."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])
    gens = [h, s]
    found = [_canonical_phase(np.eye(2, dtype=complex))]
    frontier = list(found)
    while frontier and len(found) < 24:
        nxt = []
        for u in frontier:
            for g in gens:
                w = _canonical_phase(g @ u)
                if not any(np.allclose(w, x, atol=1e-9) for x in found):
                    found.append(w)
                    nxt.append(w)
        frontier = nxt
    return GroupRep(tuple((u, u) for u in found), name="clifford1")


def load_group_rep(path) -> GroupRep:
    """Read ``{"name": ..., "elements": [...]}``.

    Each element is either ``{"u": literal, "v": literal}`` or a single matrix
    literal, which stands for ``U = V``.
    """
    data = json.loads(Path(path).read_text())
    elements = []
    for item in data["elements"]:
        if isinstance(item, dict):
            u, v = la.matrix_from_literal(item["u"]), la.matrix_from_literal(item["v"])
        else:
            u = v = la.matrix_from_literal(item)
        elements.append((u, v))
    return GroupRep(tuple(elements), name=data.get("name", Path(path).stem))


def save_group_rep(g: GroupRep, path):
    items = [{"u": la.matrix_to_literal(u), "v": la.matrix_to_literal(v)} for u, v in g.elements]
    Path(path).write_text(json.dumps({"name": g.name, "elements": items}))


def twirl_choi(n: ChoiOperator | Channel, g: GroupRep) -> ChoiOperator:
    """Group average ``1/|G| sum (conj(U) (x) V) N_AB (conj(U) (x) V)^dagger``."""
    if isinstance(n, Channel):
        n = choi_from_kraus(n)
    if (g.dim_in, g.dim_out) != n.dims:
        raise DimensionError(f"representation acts on {g.dim_in}x{g.dim_out}, channel on {n.dims}")
    ws = np.stack([np.kron(u.conj(), v) for u, v in g.elements])
    avg = np.mean(ws @ n.matrix @ la.dagger(ws), axis=0)
    return ChoiOperator(la.hermitize(avg), n.dim_in, n.dim_out)


def twirl_channel(ch: Channel, g: GroupRep) -> Channel:
    from .channels import kraus_from_choi

    return kraus_from_choi(twirl_choi(ch, g), name=f"twirl({ch.name})" if ch.name else "")


def covariance_parameter(ch: Channel | ChoiOperator, g: GroupRep, tol: float = 1e-8) -> float:
    """Half-diamond distance between a channel and its twirl over ``g``."""
    from .sdp.programs import as_choi, diamond_distance

    n = as_choi(ch)
    return diamond_distance(n, twirl_choi(n, g), tol=tol)


def bitwirl_average(t, g: GroupRep) -> np.ndarray:
    """``1/|G| sum (U (x) conj(U)) T (U (x) conj(U))^dagger`` over the input unitaries."""
    t = la.as_matrix(t)
    ws = np.stack([np.kron(u, u.conj()) for u, _ in g.elements])
    if t.shape[0] != ws.shape[1]:
        raise DimensionError(f"operator of side {t.shape[0]} does not match d^2 = {ws.shape[1]}")
    return np.mean(ws @ t @ la.dagger(ws), axis=0)


def bitwirl_closed_form(t, d: int) -> np.ndarray:
    """Haar average of ``(U (x) conj U) T (U (x) conj U)^dagger`` as ``a 1 + b Phi``."""
    t = la.as_matrix(t)
    if t.shape != (d * d, d * d):
        raise DimensionError(f"operator has shape {t.shape}, expected side d^2 = {d * d}")
    phi = la.max_entangled(d)
    tr = np.trace(t)
    f = np.real_if_close(np.trace(phi @ t))
    return (tr - f) / (d * d - 1) * np.eye(d * d) + (d * d * f - tr) / (d * d - 1) * phi


def depolarizing_fit(n: ChoiOperator | Channel):
    """Fit ``N_AB = x 1 + y Phi``; return the depolarizing weight ``q = d x`` and the fit residual."""
    if isinstance(n, Channel):
        n = choi_from_kraus(n)
    d = n.dim_in
    if n.dim_out != d:
        raise DimensionError("depolarizing fit needs equal input and output dimensions")
    phi = la.max_entangled(d)
    f = float(np.real(np.trace(phi @ n.matrix)))
    x = (d - f) / (d * d - 1)
    y = (d * d * f - d) / (d * d - 1)
    resid = float(np.max(np.abs(n.matrix - x * np.eye(d * d) - y * phi)))
    return d * x, resid

"""Dense complex linear algebra on small multipartite operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Multipartite
operators carry an explicit ordered list of subsystem dimensions and labels;
every reshuffle of subsystems is an explicit call, never implicit.

All logarithms are base 2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InvalidStateError, LabelError, NotHermitianError

#: Tolerance for validating Hermiticity / positivity of inputs.
VALIDATION_TOL = 1e-9
#: Eigenvalues below this are treated as exact zeros in entropies.
EIGEN_CLAMP = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-d complex array (no copy if already one)."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitize(m: np.ndarray) -> np.ndarray:
    """Symmetrize ``m`` to ``(m + m^dagger) / 2``."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + dagger(m))


def is_hermitian(m: np.ndarray, tol: float = VALIDATION_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def is_psd(m: np.ndarray, tol: float = VALIDATION_TOL) -> bool:
    if not is_hermitian(m, tol):
        return False
    return bool(np.linalg.eigvalsh(hermitize(m))[0] >= -tol)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def max_entangled_vector(dim: int, normalized: bool = True) -> np.ndarray:
    """``sum_i |i>|i>``, optionally divided by ``sqrt(dim)``."""
    v = np.eye(dim, dtype=complex).reshape(-1)
    return v / np.sqrt(dim) if normalized else v


def max_entangled(dim: int, normalized: bool = True) -> np.ndarray:
    """Projector onto the maximally entangled vector (``Phi``, or ``gamma`` if unnormalized)."""
    return projector(max_entangled_vector(dim, normalized))


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


# ---------------------------------------------------------------------------
# Raw array helpers (subsystems addressed by position)
# ---------------------------------------------------------------------------

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def ptrace(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace keeping the subsystems at positions ``keep`` (in original order).

    ``mat`` may carry leading batch axes.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    keep = sorted(set(keep))
    total = int(np.prod(dims))
    batch = mat.shape[:-2]
    if mat.shape[-2:] != (total, total):
        raise DimensionError(f"matrix shape {mat.shape[-2:]} does not match dims {dims}")
    rows = list(_LETTERS[:n])
    cols = list(_LETTERS[n:2 * n])
    for i in range(n):
        if i not in keep:
            cols[i] = rows[i]
    out_rows = "".join(rows[i] for i in keep)
    out_cols = "".join(cols[i] for i in keep)
    spec = "..." + "".join(rows) + "".join(cols) + "->..." + out_rows + out_cols
    t = mat.reshape(batch + dims + dims)
    kept = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum(spec, t).reshape(batch + (kept, kept))


def ptranspose(mat: np.ndarray, dims: Sequence[int], sys: int) -> np.ndarray:
    """Transpose the subsystem at position ``sys``; batch axes allowed."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    batch = mat.shape[:-2]
    nb = len(batch)
    t = mat.reshape(batch + dims + dims)
    t = np.swapaxes(t, nb + sys, nb + n + sys)
    return t.reshape(mat.shape)


def permute_systems(mat: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new position ``k`` holds old factor ``order[k]``."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    t = mat.reshape(dims + dims)
    t = np.transpose(t, list(order) + [n + o for o in order])
    total = int(np.prod(dims))
    return t.reshape(total, total)


# ---------------------------------------------------------------------------
# Multipartite operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultipartiteOperator:
    """A square matrix on an ordered tensor product of labelled subsystems."""

    matrix: np.ndarray
    dims: tuple
    labels: tuple

    def __post_init__(self):
        mat = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(str(lab) for lab in self.labels)
        if len(dims) != len(labels):
            raise DimensionError(f"{len(dims)} dims but {len(labels)} labels")
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate subsystem labels in {labels}")
        total = int(np.prod(dims)) if dims else 1
        if mat.shape != (total, total):
            raise DimensionError(f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def dim(self, label: str) -> int:
        return self.dims[self.position(label)]

    def marginal(self, labels: Iterable[str]) -> "MultipartiteOperator":
        """Reduced operator on ``labels`` (kept in this operator's order)."""
        keep = {self.position(lab) for lab in labels}
        traced = [lab for i, lab in enumerate(self.labels) if i not in keep]
        return partial_trace(self, traced)


def partial_trace(op: MultipartiteOperator, traced: Iterable[str]) -> MultipartiteOperator:
    """Trace out the subsystems named in ``traced``."""
    positions = {op.position(lab) for lab in traced}
    keep = [i for i in range(len(op.dims)) if i not in positions]
    mat = ptrace(op.matrix, op.dims, keep)
    return MultipartiteOperator(mat, tuple(op.dims[i] for i in keep), tuple(op.labels[i] for i in keep))


def partial_transpose(op: MultipartiteOperator, sub: str) -> MultipartiteOperator:
    """Transpose on the single factor ``sub``."""
    pos = op.position(sub)
    return MultipartiteOperator(ptranspose(op.matrix, op.dims, pos), op.dims, op.labels)


def tensor(*ops: MultipartiteOperator) -> MultipartiteOperator:
    """Tensor product of labelled operators, concatenating subsystem lists."""
    mat = kron_all(o.matrix for o in ops)
    dims = sum((o.dims for o in ops), ())
    labels = sum((o.labels for o in ops), ())
    return MultipartiteOperator(mat, dims, labels)


# ---------------------------------------------------------------------------
# Spectral functions
# ---------------------------------------------------------------------------


def eig_hermitian(m: np.ndarray, tol: float = 1e-10):
    """Eigendecomposition of a Hermitian matrix.

    :return: ``(eigenvalues ascending, eigenvectors as columns)``
    :raises NotHermitianError: if ``max|m - m^dagger| > tol``.
    """
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitianError("eig_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh(hermitize(m))
    return w, v


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    m = as_matrix(m)
    if is_hermitian(m, 1e-12):
        return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(m)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def entropy_of_spectrum(eigs) -> float:
    lam = np.asarray(eigs, dtype=float)
    lam = lam[lam > EIGEN_CLAMP]
    return float(-np.sum(lam * np.log2(lam)) + 0.0)


def binary_entropy(x: float) -> float:
    """``h(x) = -x log x - (1-x) log(1-x)``."""
    return entropy_of_spectrum([x, 1.0 - x])


def von_neumann_entropy(rho: np.ndarray, tol: float = VALIDATION_TOL) -> float:
    """Entropy in bits of a density matrix.

    :raises InvalidStateError: if ``rho`` is not PSD with unit trace within ``tol``.
    """
    rho = as_matrix(rho)
    if not is_hermitian(rho, tol):
        raise InvalidStateError("density matrix is not Hermitian")
    w = np.linalg.eigvalsh(hermitize(rho))
    if w[0] < -tol or abs(np.sum(w) - 1.0) > tol:
        raise InvalidStateError(f"not a state: min eig {w[0]:.3g}, trace {np.sum(w):.12g}")
    return entropy_of_spectrum(w)


# ---------------------------------------------------------------------------
# Entropic expressions
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"[A-Za-z][0-9']*")


def _group(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    if "," in text:
        return tuple(t.strip() for t in text.split(",") if t.strip())
    tokens = _TOKEN.findall(text)
    if "".join(tokens) != text.replace(" ", ""):
        raise LabelError(f"cannot parse subsystem group {text!r}")
    return tuple(tokens)


def entropy(op: MultipartiteOperator, labels: Iterable[str]) -> float:
    """``H(labels)`` of the state ``op``."""
    labels = tuple(labels)
    if not labels:
        return 0.0
    return von_neumann_entropy(op.marginal(labels).matrix)


def conditional_entropy(op: MultipartiteOperator, a: Iterable[str], b: Iterable[str]) -> float:
    """``H(a|b) = H(ab) - H(b)``."""
    a, b = tuple(a), tuple(b)
    return entropy(op, a + b) - entropy(op, b)


def mutual_information(op, a, b, given=()) -> float:
    """``I(a;b|given)``."""
    a, b, c = tuple(a), tuple(b), tuple(given)
    return entropy(op, a + c) + entropy(op, b + c) - entropy(op, a + b + c) - entropy(op, c)


def coherent_information(op: MultipartiteOperator, a, b) -> float:
    """``I(a>b) = H(b) - H(ab)``."""
    a, b = tuple(a), tuple(b)
    return entropy(op, b) - entropy(op, a + b)


_EXPR_PATTERNS = [
    (re.compile(r"^[HS]\(([^|;>)]*)\)$"), "entropy"),
    (re.compile(r"^[HS]\(([^|;>)]*)\|([^)]*)\)$"), "conditional"),
    (re.compile(r"^I\(([^;>)]*);([^|)]*)\)$"), "mutual"),
    (re.compile(r"^I\(([^;>)]*);([^|)]*)\|([^)]*)\)$"), "mutual"),
    (re.compile(r"^I\(([^;>)]*)(?:>|⟩)([^)]*)\)$"), "coherent"),
]


def entropic(op: MultipartiteOperator, expr: str) -> float:
    """Evaluate an entropic expression on the state ``op``.

    Supported forms (labels juxtaposed or comma separated)::

        H(AB)   H(A|B)   I(A;B)   I(AX;B|C)   I(A>BX)

    >>> phi = MultipartiteOperator(max_entangled(2), (2, 2), ("A", "B"))
    >>> round(entropic(phi, "I(A;B)"), 12)
    2.0
    """
    text = expr.replace(" ", "")
    for pattern, kind in _EXPR_PATTERNS:
        m = pattern.match(text)
        if m is None:
            continue
        groups = [_group(g) for g in m.groups()]
        for g in groups:
            for lab in g:
                op.position(lab)
        if kind == "entropy":
            return entropy(op, groups[0])
        if kind == "conditional":
            return conditional_entropy(op, groups[0], groups[1])
        if kind == "mutual":
            return mutual_information(op, *groups)
        return coherent_information(op, groups[0], groups[1])
    raise ValueError(f"unsupported entropic expression {expr!r}")


# ---------------------------------------------------------------------------
# Random objects and literal format
# ---------------------------------------------------------------------------


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase-fixed R."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Hilbert-Schmidt for full rank) measure."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    return hermitize(rho / np.trace(rho).real)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitize(g)


def matrix_from_literal(data) -> np.ndarray:
    """Parse nested row-major lists of ``[re, im]`` pairs (bare reals also accepted)."""
    rows = []
    for row in data:
        entries = []
        for x in row:
            if isinstance(x, (list, tuple)):
                if len(x) != 2:
                    raise ValueError(f"matrix entry must be [re, im], got {x!r}")
                entries.append(complex(float(x[0]), float(x[1])))
            else:
                entries.append(complex(float(x), 0.0))
        rows.append(entries)
    if not rows or len({len(r) for r in rows}) != 1:
        raise DimensionError("matrix literal must be a non-empty rectangular array")
    return np.array(rows, dtype=complex)


def matrix_to_literal(m: np.ndarray) -> list:
    m = as_matrix(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]

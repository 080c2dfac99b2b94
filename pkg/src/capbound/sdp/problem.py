"""Standard-form SDP problems and a small builder for complex Hermitian models.

An :class:`SdpProblem` holds real symmetric PSD block variables, a count of
free scalars, a linear objective and dense equality rows, all over one flat
vector (svec coordinates of each block, then free scalars).  The
:class:`SdpBuilder` lets programs be written with affine Hermitian matrix
expressions; complex PSD variables are realized through the real embedding
``M >= 0  <=>  [[Re M, -Im M], [Im M, Re M]] >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import linalg as la
from ..errors import DimensionError, SolverError
from .solver import SdpSolution, smat, solve_standard, svec, svec_dim


@dataclass
class SdpProblem:
    """``minimize c.x + offset  s.t.  A x = b``, blocks PSD."""

    blocks: list  # (name, side length)
    n_free: int
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        n = self.n_vars
        self.c = np.asarray(self.c, dtype=float)
        self.a = np.asarray(self.a, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float)
        if self.c.shape != (n,):
            raise DimensionError(f"objective has length {self.c.shape}, expected {n}")
        if self.a.shape[0] != self.b.shape[0]:
            raise DimensionError("equality rows and right-hand side differ in length")
        names = [name for name, _ in self.blocks]
        if len(set(names)) != len(names):
            raise DimensionError("block names must be unique")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise ValueError("problem data must be finite real numbers")

    @property
    def n_block_vars(self) -> int:
        return sum(svec_dim(k) for _, k in self.blocks)

    @property
    def n_vars(self) -> int:
        return self.n_block_vars + self.n_free

    def block_slices(self) -> dict:
        out, pos = {}, 0
        for name, k in self.blocks:
            out[name] = slice(pos, pos + svec_dim(k))
            pos += svec_dim(k)
        return out

    def dump(self, path=None) -> str:
        """Sparse text dump: one ``block row col value`` line per nonzero.

        Each constraint starts with ``constraint <i> rhs <b_i>``; the objective
        is listed first as ``objective``.  Free scalars use block ``free`` and
        row = col = index.
        """
        lines = []

        def emit(vec):
            for name, sl in self.block_slices().items():
                k = dict(self.blocks)[name]
                m = smat(vec[sl], k)
                iu, ju = np.nonzero(np.triu(m))
                lines.extend(f"{name} {i} {j} {m[i, j]:.17g}" for i, j in zip(iu, ju))
            for idx in np.nonzero(vec[self.n_block_vars:])[0]:
                lines.append(f"free {idx} {idx} {vec[self.n_block_vars + idx]:.17g}")

        lines.append(f"objective offset {self.offset:.17g}")
        emit(self.c)
        for i, (row, rhs) in enumerate(zip(self.a, self.b)):
            lines.append(f"constraint {i} rhs {rhs:.17g}")
            emit(row)
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def solve(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 200) -> SdpSolution:
    """Solve and attach named block values (symmetric matrices) to the result."""
    sol = solve_standard(problem.a, problem.b, problem.c, [k for _, k in problem.blocks],
                         problem.n_free, tol=tol, max_iter=max_iter)
    if sol.status != "infeasible":
        sol.primal_value += problem.offset
        sol.dual_value += problem.offset
    for (name, k), sl in zip(problem.blocks, problem.block_slices().values()):
        sol.block_values[name] = smat(sol.x[sl], k)
    return sol


# ---------------------------------------------------------------------------
# Affine Hermitian expressions
# ---------------------------------------------------------------------------


def _batch_kron(a, b):
    """Kronecker product over the last two axes, broadcasting leading axes."""
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    shape = out.shape[:-4] + (a.shape[-2] * b.shape[-2], a.shape[-1] * b.shape[-1])
    return out.reshape(shape)


class HermExpr:
    """Affine map ``x -> sum_t x[idx_t] mats_t + const`` into ``n x n`` matrices.

    Coefficient matrices are kept Hermitian so expression values are Hermitian
    for every real ``x``.
    """

    __slots__ = ("idx", "mats", "const")

    def __init__(self, idx, mats, const):
        self.idx = np.asarray(idx, dtype=int)
        self.mats = np.asarray(mats, dtype=complex)
        self.const = np.asarray(const, dtype=complex)

    @property
    def dim(self) -> int:
        return self.const.shape[0]

    @classmethod
    def constant(cls, m):
        m = la.as_matrix(m)
        return cls(np.zeros(0, int), np.zeros((0,) + m.shape), m)

    def _lift(self, other):
        if isinstance(other, HermExpr):
            return other
        other = np.asarray(other, dtype=complex)
        if other.ndim == 0:
            other = other * np.eye(self.dim)
        return HermExpr.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        if other.dim != self.dim:
            raise DimensionError(f"cannot add {self.dim}x{self.dim} and {other.dim}x{other.dim} expressions")
        return HermExpr(np.concatenate([self.idx, other.idx]),
                        np.concatenate([self.mats, other.mats]), self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return HermExpr(self.idx, -self.mats, -self.const)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, scalar):
        scalar = float(scalar)
        return HermExpr(self.idx, scalar * self.mats, scalar * self.const)

    __rmul__ = __mul__

    def map(self, fn):
        """Apply a linear, batch-aware map ``(..., n, n) -> (..., m, m)``."""
        return HermExpr(self.idx, fn(self.mats), fn(self.const))

    def ptrace(self, dims, keep):
        return self.map(lambda m: la.ptrace(m, dims, keep))

    def ptranspose(self, dims, sys):
        return self.map(lambda m: la.ptranspose(m, dims, sys))

    def kron_left(self, m):
        """``m (x) expr`` for a constant ``m``."""
        m = la.as_matrix(m)
        return self.map(lambda x: _batch_kron(m, x))

    def kron_right(self, m):
        """``expr (x) m`` for a constant ``m``."""
        m = la.as_matrix(m)
        return self.map(lambda x: _batch_kron(x, m))

    def trace(self):
        return self.map(lambda m: np.trace(m, axis1=-2, axis2=-1)[..., None, None])

    def value(self, xflat):
        out = self.const.copy()
        if len(self.idx):
            out = out + np.tensordot(xflat[self.idx], self.mats, axes=1)
        return la.hermitize(out)

    def consolidated(self, nvar: int) -> np.ndarray:
        """Dense coefficient array of shape ``(nvar, n, n)``."""
        full = np.zeros((nvar, self.dim, self.dim), dtype=complex)
        if len(self.idx):
            np.add.at(full, self.idx, self.mats)
        return full


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------


def _real_block_basis(k: int) -> np.ndarray:
    """Matrices ``smat(e_t)`` for every svec coordinate of a ``k x k`` block."""
    nk = svec_dim(k)
    return np.stack([smat(np.eye(nk)[t], k) for t in range(nk)])


def embed_hermitian(m) -> np.ndarray:
    """Real symmetric embedding ``[[Re M, -Im M], [Im M, Re M]]`` of a Hermitian matrix."""
    m = la.as_matrix(m)
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def unembed_hermitian(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed_hermitian` on its range, averaging redundant blocks."""
    n = x.shape[0] // 2
    x11, x12, x21, x22 = x[:n, :n], x[:n, n:], x[n:, :n], x[n:, n:]
    return la.hermitize((x11 + x22) / 2 + 1j * (x21 - x12) / 2)


class SdpBuilder:
    """Incrementally assemble a :class:`SdpProblem` from Hermitian expressions."""

    def __init__(self):
        self._blocks = []       # (name, k, first var)
        self._kinds = []        # per var: ("block", name) or ("free",)
        self._rows = []         # (dict var -> coef, rhs)
        self._row_idx = []
        self._row_val = []
        self._rhs = []
        self._objective = None
        self._names = set()

    @property
    def nvar(self) -> int:
        return len(self._kinds)

    def _alloc(self, count, kind):
        start = self.nvar
        self._kinds.extend([kind] * count)
        return np.arange(start, start + count)

    def _new_name(self, name):
        if name is None:
            name = f"_slack{len(self._blocks)}"
        if name in self._names:
            raise DimensionError(f"block name {name!r} already used")
        self._names.add(name)
        return name

    def real_psd_block(self, name: str | None, k: int) -> HermExpr:
        """Real symmetric PSD variable of side ``k`` (as a Hermitian expression)."""
        name = self._new_name(name)
        idx = self._alloc(svec_dim(k), "block")
        self._blocks.append((name, k, int(idx[0])))
        return HermExpr(idx, _real_block_basis(k), np.zeros((k, k)))

    def psd_block(self, name: str | None, n: int) -> HermExpr:
        """Complex Hermitian PSD variable of side ``n`` (a real ``2n`` block)."""
        x = self.real_psd_block(name, 2 * n)
        e = x.mats.real
        mats = (e[:, :n, :n] + e[:, n:, n:]) / 2 + 1j * (e[:, n:, :n] - e[:, :n, n:]) / 2
        return HermExpr(x.idx, mats, np.zeros((n, n)))

    def free_scalar(self) -> HermExpr:
        idx = self._alloc(1, "free")
        return HermExpr(idx, np.ones((1, 1, 1)), np.zeros((1, 1)))

    def free_hermitian(self, n: int) -> HermExpr:
        idx = self._alloc(n * n, "free")
        mats = []
        for i in range(n):
            m = np.zeros((n, n), dtype=complex)
            m[i, i] = 1
            mats.append(m)
        for i in range(n):
            for j in range(i + 1, n):
                m = np.zeros((n, n), dtype=complex)
                m[i, j] = m[j, i] = 1
                mats.append(m)
                m = np.zeros((n, n), dtype=complex)
                m[i, j], m[j, i] = 1j, -1j
                mats.append(m)
        return HermExpr(idx, np.stack(mats), np.zeros((n, n)))

    def constrain_eq(self, expr: HermExpr, value=0.0):
        """Hermitian equality ``expr == value``: ``n^2`` independent real rows."""
        expr = expr - value
        n = expr.dim
        const = expr.const
        idx, mats = expr.idx, expr.mats
        iu, ju = np.triu_indices(n)
        for i, j in zip(iu, ju):
            parts = [(np.real, -const[i, j].real)]
            if i != j:
                parts.append((np.imag, -const[i, j].imag))
            for part, rhs in parts:
                coef = part(mats[:, i, j])
                nz = np.abs(coef) > 0
                self._rows.append((idx[nz], coef[nz], float(rhs)))

    def constrain_psd(self, expr: HermExpr, name: str | None = None, real: bool = False) -> HermExpr:
        """``expr >= 0`` via a PSD slack block; returns the slack expression."""
        slack = self.real_psd_block(name, expr.dim) if real else self.psd_block(name, expr.dim)
        self.constrain_eq(expr - slack, 0.0)
        return slack

    def minimize(self, expr: HermExpr):
        if expr.dim != 1:
            raise DimensionError("objective must be a scalar (1x1) expression")
        self._objective = expr

    def build(self) -> tuple:
        """Return ``(problem, perm)``; ``perm[v]`` is the column of builder variable ``v``."""
        perm = np.empty(self.nvar, dtype=int)
        col = 0
        order = sorted(self._blocks, key=lambda t: t[2])
        for name, k, start in order:
            perm[start:start + svec_dim(k)] = np.arange(col, col + svec_dim(k))
            col += svec_dim(k)
        free = [v for v, kind in enumerate(self._kinds) if kind == "free"]
        perm[free] = np.arange(col, col + len(free))
        n = self.nvar
        a = np.zeros((len(self._rows), n))
        b = np.zeros(len(self._rows))
        for r, (idx, coef, rhs) in enumerate(self._rows):
            np.add.at(a[r], perm[idx], coef)
            b[r] = rhs
        c = np.zeros(n)
        offset = 0.0
        if self._objective is not None:
            np.add.at(c, perm[self._objective.idx], self._objective.mats[:, 0, 0].real)
            offset = float(self._objective.const[0, 0].real)
        problem = SdpProblem([(name, k) for name, k, _ in order], len(free), c, a, b, offset)
        return problem, perm

    def solve(self, tol: float = 1e-8, max_iter: int = 200, strict: bool = True) -> "BuiltSolution":
        problem, perm = self.build()
        sol = solve(problem, tol=tol, max_iter=max_iter)
        if strict and sol.status != "optimal":
            raise SolverError(f"SDP solver finished with status {sol.status!r} after {sol.iterations} iterations",
                              solution=sol)
        return BuiltSolution(sol, sol.x[perm], problem)


@dataclass
class BuiltSolution:
    """Solver result with builder-variable values for expression evaluation."""

    solution: SdpSolution
    xvars: np.ndarray
    problem: SdpProblem = field(repr=False)

    def value(self, expr: HermExpr) -> np.ndarray:
        return expr.value(self.xvars)

    def scalar(self, expr: HermExpr) -> float:
        return float(expr.value(self.xvars)[0, 0].real)

    @property
    def optimum(self) -> float:
        return self.solution.primal_value

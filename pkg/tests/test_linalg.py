import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import logm

from capbound import linalg as la
from capbound.channels import amplitude_damping, choi_from_kraus
from capbound.errors import InvalidStateError, LabelError, NotHermitianError

X, Y, Z, I2 = la.PAULI_X, la.PAULI_Y, la.PAULI_Z, la.PAULI_I


def _ptrace_loops(mat, d1, d2, keep_first):
    # explicit index sums, independent of the reshape/einsum implementation
    out = np.zeros((d1, d1) if keep_first else (d2, d2), dtype=complex)
    for i in range(d1):
        for j in range(d1):
            for k in range(d2):
                for l in range(d2):
                    v = mat[i * d2 + k, j * d2 + l]
                    if keep_first and k == l:
                        out[i, j] += v
                    if not keep_first and i == j:
                        out[k, l] += v
    return out


def test_kron_examples():
    np.testing.assert_array_equal(la.kron(I2, I2), np.eye(4))
    np.testing.assert_array_equal(la.kron(Z, Z), np.diag([1, -1, -1, 1]))
    top = la.kron(la.projector(la.ket(0, 2)), X)
    np.testing.assert_array_equal(top[:2, :2], X)
    np.testing.assert_array_equal(top[2:, :], 0)


def test_partial_trace_examples():
    phi = la.MultipartiteOperator(la.max_entangled(2), (2, 2), ("R", "A"))
    np.testing.assert_allclose(la.partial_trace(phi, ["R"]).matrix, I2 / 2, atol=1e-15)

    rng = np.random.default_rng(1)
    rho, sig = la.random_density(2, rng), 0.7 * la.random_density(3, rng)
    op = la.MultipartiteOperator(np.kron(rho, sig), (2, 3), ("A", "B"))
    np.testing.assert_allclose(la.partial_trace(op, ["B"]).matrix, 0.7 * rho, atol=1e-14)

    choi = choi_from_kraus(amplitude_damping(0.3))
    np.testing.assert_allclose(la.partial_trace(choi.op, ["B"]).matrix, np.eye(2), atol=1e-14)


def test_partial_trace_against_loops():
    rng = np.random.default_rng(2)
    m = la.random_hermitian(6, rng)
    np.testing.assert_allclose(la.ptrace(m, (2, 3), [0]), _ptrace_loops(m, 2, 3, True), atol=1e-13)
    np.testing.assert_allclose(la.ptrace(m, (2, 3), [1]), _ptrace_loops(m, 2, 3, False), atol=1e-13)


def test_partial_trace_composes():
    rng = np.random.default_rng(3)
    op = la.MultipartiteOperator(la.random_density(12, rng), (2, 3, 2), ("R", "X", "A"))
    both = la.partial_trace(op, ["R", "X"]).matrix
    stepwise = la.partial_trace(la.partial_trace(op, ["R"]), ["X"]).matrix
    np.testing.assert_allclose(both, stepwise, atol=1e-12)


def test_unknown_label():
    op = la.MultipartiteOperator(np.eye(4) / 4, (2, 2), ("A", "B"))
    with pytest.raises(LabelError):
        la.partial_trace(op, ["C"])
    with pytest.raises(LabelError):
        la.partial_transpose(op, "C")
    with pytest.raises(LabelError):
        la.MultipartiteOperator(np.eye(4), (2, 2), ("A", "A"))


def test_partial_transpose_examples():
    rng = np.random.default_rng(4)
    rho, sig = la.random_density(2, rng), la.random_density(3, rng)
    op = la.MultipartiteOperator(np.kron(rho, sig), (2, 3), ("A", "B"))
    np.testing.assert_allclose(la.partial_transpose(op, "B").matrix, np.kron(rho, sig.T), atol=1e-15)
    twice = la.partial_transpose(la.partial_transpose(op, "A"), "A")
    np.testing.assert_allclose(twice.matrix, op.matrix, atol=0)

    phi = la.MultipartiteOperator(la.max_entangled(2), (2, 2), ("A", "B"))
    w = np.linalg.eigvalsh(la.partial_transpose(phi, "B").matrix)
    np.testing.assert_allclose(w, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)


def test_eig_hermitian_examples():
    w, _ = la.eig_hermitian(Z)
    np.testing.assert_allclose(w, [-1, 1])
    w, _ = la.eig_hermitian(I2 / 2)
    np.testing.assert_allclose(w, [0.5, 0.5])
    with pytest.raises(NotHermitianError):
        la.eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_eig_ampdamp_choi():
    # block form: span{|00>,|11>} carries [[1, s], [s, 1-p]], plus p on |10>
    p = 0.5
    s = np.sqrt(1 - p)
    tr, det = 2 - p, (1 - p) - s * s
    disc = np.sqrt(tr * tr - 4 * det)
    expected = np.sort([0.0, p, (tr - disc) / 2, (tr + disc) / 2])
    w, _ = la.eig_hermitian(choi_from_kraus(amplitude_damping(p)).matrix)
    np.testing.assert_allclose(w, expected, atol=1e-12)


@pytest.mark.parametrize("dim", [2, 5, 16])
def test_eig_reconstruction(dim):
    rng = np.random.default_rng(dim)
    m = la.random_hermitian(dim, rng)
    w, v = la.eig_hermitian(m)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) <= 1e-9


def test_trace_norm_examples():
    assert la.trace_norm(Z) == pytest.approx(2.0)
    rng = np.random.default_rng(5)
    assert la.trace_norm(la.random_density(3, rng)) == pytest.approx(1.0)


def test_trace_norm_ampdamp_on_phi():
    # Phi - (id x A_p)(Phi): entry p/2 on |10>, plus [[0, (1-s)/2], [(1-s)/2, p/2]] on |00>,|11>
    p = 0.3
    ch = amplitude_damping(p)
    out = choi_from_kraus(ch).matrix / 2
    s = np.sqrt(1 - p)
    expected = p / 2 + 2 * np.sqrt(p * p / 16 + (1 - s) ** 2 / 4)
    assert la.trace_norm(la.max_entangled(2) - out) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.3717655, abs=1e-7)
    # the input |11> attains the diamond value 2p
    e11 = np.diag([0.0, 1.0])
    diff = np.kron(e11, e11) - np.kron(e11, ch(e11))
    assert la.trace_norm(diff) == pytest.approx(2 * p, abs=1e-12)


def test_von_neumann_examples():
    rng = np.random.default_rng(6)
    v = la.haar_state(3, rng)
    assert la.von_neumann_entropy(np.outer(v, v.conj())) == pytest.approx(0.0, abs=1e-12)
    assert la.von_neumann_entropy(I2 / 2) == pytest.approx(1.0)
    assert la.von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(0.811278124459, abs=1e-10)
    with pytest.raises(InvalidStateError):
        la.von_neumann_entropy(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidStateError):
        la.von_neumann_entropy(np.diag([1.2, -0.2]))


def test_entropy_against_matrix_log():
    rng = np.random.default_rng(7)
    rho = la.random_density(4, rng)
    oracle = -np.real(np.trace(rho @ logm(rho))) / np.log(2)
    assert la.von_neumann_entropy(rho) == pytest.approx(oracle, abs=1e-10)


def test_entropic_examples():
    phi = la.MultipartiteOperator(la.max_entangled(2), (2, 2), ("A", "B"))
    assert la.entropic(phi, "I(A;B)") == pytest.approx(2.0, abs=1e-12)
    rng = np.random.default_rng(8)
    rho, sig = la.random_density(2, rng), la.random_density(2, rng)
    prod = la.MultipartiteOperator(np.kron(rho, sig), (2, 2), ("A", "B"))
    assert la.entropic(prod, "I(A>B)") == pytest.approx(-la.von_neumann_entropy(rho), abs=1e-12)
    assert la.entropic(prod, "H(A|B)") == pytest.approx(la.von_neumann_entropy(rho), abs=1e-12)
    with pytest.raises(LabelError):
        la.entropic(prod, "H(C)")


def test_literal_roundtrip():
    rng = np.random.default_rng(9)
    m = la.random_hermitian(3, rng)
    np.testing.assert_array_equal(la.matrix_from_literal(la.matrix_to_literal(m)), m)
    np.testing.assert_array_equal(la.matrix_from_literal([[1, [0, 1]], [[0, -1], 2]]),
                                  np.array([[1, 1j], [-1j, 2]]))


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 2)]))
def test_information_inequalities(seed, dims):
    rng = np.random.default_rng(seed)
    op = la.MultipartiteOperator(la.random_density(dims[0] * dims[1], rng), dims, ("A", "B"))
    assert la.mutual_information(op, "A", "B") >= -1e-10
    assert abs(la.conditional_entropy(op, "A", "B")) <= np.log2(dims[0]) + 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=6))
def test_entropy_unitary_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    rho, u = la.random_density(dim, rng), la.haar_unitary(dim, rng)
    s = la.von_neumann_entropy(rho)
    assert 0 <= s <= np.log2(dim) + 1e-12
    assert la.von_neumann_entropy(u @ rho @ u.conj().T) == pytest.approx(s, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=8))
def test_trace_norm_dominates_trace(seed, dim):
    m = la.random_hermitian(dim, np.random.default_rng(seed))
    assert la.trace_norm(m) >= abs(np.trace(m).real) - 1e-12


def test_many_random_states_information_bounds():
    rng = np.random.default_rng(10)
    for _ in range(500):
        op = la.MultipartiteOperator(la.random_density(4, rng, rank=int(rng.integers(1, 5))), (2, 2), ("A", "B"))
        assert la.mutual_information(op, "A", "B") >= -1e-10
        assert abs(la.conditional_entropy(op, "A", "B")) <= 1 + 1e-10

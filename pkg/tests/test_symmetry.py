import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from capbound import channels as C
from capbound import linalg as la
from capbound import symmetry as S
from capbound.errors import InvalidChannelError
from capbound.sdp.programs import diamond_distance


def _random_channel(rng, rank=2):
    v = la.haar_unitary(2 * rank, rng)[:, :2]
    return C.Channel(2, 2, tuple(v.reshape(2, rank, 2).transpose(1, 0, 2)))


def test_pauli_average_is_maximally_mixed():
    g = S.pauli_rep()
    assert len(g) == 4 and g.input_is_one_design()
    rng = np.random.default_rng(0)
    for _ in range(50):
        rho = la.random_density(2, rng)
        avg = np.mean([u @ rho @ u.conj().T for u, _ in g.elements], axis=0)
        np.testing.assert_allclose(avg, np.eye(2) / 2, atol=1e-14)


def test_clifford_group():
    g = S.clifford1_rep()
    assert len(g) == 24
    assert g.input_is_one_design()
    # closed under products modulo phase
    us = [u for u, _ in g.elements]
    for a in us[::5]:
        for b in us[::7]:
            w = a @ b
            assert any(abs(abs(np.trace(x.conj().T @ w)) - 2) < 1e-9 for x in us)


def test_single_element_is_not_design():
    g = S.GroupRep(((np.eye(2), np.eye(2)),))
    assert not g.input_is_one_design()


def test_non_unitary_rejected():
    with pytest.raises(InvalidChannelError):
        S.GroupRep(((np.diag([1.0, 0.5]), np.eye(2)),))


def test_group_rep_roundtrip(tmp_path):
    g = S.clifford1_rep()
    S.save_group_rep(g, tmp_path / "g.json")
    back = S.load_group_rep(tmp_path / "g.json")
    assert back.name == "clifford1" and len(back) == 24
    for (u, v), (u2, v2) in zip(g.elements, back.elements):
        np.testing.assert_array_equal(u, u2)
        np.testing.assert_array_equal(v, v2)


def test_group_rep_single_literal(tmp_path):
    path = tmp_path / "z.json"
    path.write_text('{"elements": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}')
    g = S.load_group_rep(path)
    assert g.name == "z" and len(g) == 2
    np.testing.assert_array_equal(g.elements[1][1], np.diag([1, -1]))


@pytest.mark.parametrize("d", [2, 3])
def test_bitwirl_examples(d):
    np.testing.assert_allclose(S.bitwirl_closed_form(np.eye(d * d), d), np.eye(d * d), atol=1e-14)
    phi = la.max_entangled(d)
    np.testing.assert_allclose(S.bitwirl_closed_form(phi, d), phi, atol=1e-14)


def test_bitwirl_clifford_matches_closed_form():
    g = S.clifford1_rep()
    rng = np.random.default_rng(1)
    for _ in range(10):
        t = la.random_hermitian(4, rng)
        np.testing.assert_allclose(S.bitwirl_average(t, g), S.bitwirl_closed_form(t, 2), atol=1e-12)


def test_bitwirl_closed_form_against_haar_sampling():
    rng = np.random.default_rng(2)
    t = la.random_density(4, rng)
    n = 100_000
    z = (rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    u = q * (d / np.abs(d))[:, None, :]
    w = np.einsum("nij,nkl->nikjl", u, u.conj()).reshape(n, 4, 4)
    avg = np.einsum("nij,jk,nlk->il", w, t, w.conj()) / n
    np.testing.assert_allclose(avg, S.bitwirl_closed_form(t, 2), atol=2e-3)


def test_depolarizing_is_pauli_covariant():
    for p in (0.1, 0.5):
        ch = C.depolarizing_qubit(p)
        assert C.channels_equal(S.twirl_channel(ch, S.pauli_rep()), ch)
        assert S.covariance_parameter(ch, S.pauli_rep()) <= 1e-7
        assert S.covariance_parameter(ch, S.clifford1_rep()) <= 1e-7


def test_twirl_of_ampdamp_is_unital():
    tw = S.twirl_channel(C.amplitude_damping(0.4), S.pauli_rep())
    np.testing.assert_allclose(tw(np.eye(2) / 2), np.eye(2) / 2, atol=1e-12)


def test_clifford_twirl_is_depolarizing():
    rng = np.random.default_rng(3)
    for _ in range(3):
        tw = S.twirl_choi(_random_channel(rng), S.clifford1_rep())
        q, resid = S.depolarizing_fit(tw)
        assert resid <= 1e-12
        assert 0 <= q <= 4 / 3 + 1e-12


def test_twirl_idempotent_and_covariant():
    g = S.pauli_rep()
    ch = C.mix_ad_depol(0.3)
    once = S.twirl_choi(ch, g)
    np.testing.assert_allclose(S.twirl_choi(once, g).matrix, once.matrix, atol=1e-14)
    assert S.covariance_parameter(once, g) <= 1e-7


def test_depolarizing_fit_examples():
    for p in (0.0, 0.3, 0.75):
        q, resid = S.depolarizing_fit(C.depolarizing_qubit(p))
        assert q == pytest.approx(4 * p / 3, abs=1e-12)
        assert resid <= 1e-14
    q, resid = S.depolarizing_fit(C.identity(2))
    assert q == pytest.approx(0, abs=1e-14)
    _, resid = S.depolarizing_fit(C.amplitude_damping(0.5))
    assert resid > 0.1


def test_covariance_parameter_ampdamp_positive():
    eps = S.covariance_parameter(C.amplitude_damping(0.3), S.pauli_rep())
    assert 0.01 < eps < 1


def test_covariant_pair_diamond_at_phi():
    # for Pauli-covariant pairs the maximally entangled input is optimal
    rng = np.random.default_rng(4)
    g = S.pauli_rep()
    for _ in range(5):
        a = S.twirl_channel(_random_channel(rng), g)
        b = S.twirl_channel(_random_channel(rng, 3), g)
        at_phi = 0.5 * la.trace_norm((C.choi_from_kraus(a).matrix - C.choi_from_kraus(b).matrix) / 2)
        assert diamond_distance(a, b) == pytest.approx(at_phi, abs=1e-7)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_twirl_keeps_covariance_zero(seed):
    a = S.twirl_channel(_random_channel(np.random.default_rng(seed)), S.pauli_rep())
    assert S.covariance_parameter(a, S.pauli_rep()) <= 1e-7

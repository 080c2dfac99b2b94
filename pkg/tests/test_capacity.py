import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from capbound import channels as C
from capbound import linalg as la
from capbound.capacity import bounds as B
from capbound.capacity import holevo as H
from capbound.errors import CovarianceError, DimensionError, DimensionGuardError, ParameterError
from capbound.sdp import programs
from capbound.symmetry import clifford1_rep, pauli_rep, twirl_channel

h2 = la.binary_entropy


def _g_oracle(e):
    return 0.0 if e == 0 else (1 + e) * np.log2(1 + e) - e * np.log2(e)


# ---------------------------------------------------------------------------
# penalty functions
# ---------------------------------------------------------------------------


def test_g_examples():
    assert B.g_eps(0) == 0
    assert B.g_eps(1) == pytest.approx(2.0)
    assert B.g_eps(0.5) == pytest.approx(1.5 * np.log2(1.5) + 0.5, abs=1e-12)
    assert B.g_eps(0.5) == pytest.approx(1.377443751, abs=1e-9)
    with pytest.raises(ParameterError):
        B.g_eps(1.5)


def test_g_monotone_concave():
    # g'' = (1/(1+e) - 1/e) / ln 2 < 0 on (0, 1]
    xs = np.linspace(0, 1, 1001)
    g = np.array([B.g_eps(x) for x in xs])
    assert np.all(np.diff(g) > 0)
    assert np.all(np.diff(g, 2) <= 1e-12)


def test_f_examples():
    assert B.f1(0, 2) == 0
    assert B.f2(0.5, 2, 2) == pytest.approx(1 + _g_oracle(0.5) + 2 + _g_oracle(1.0), abs=1e-12)
    with pytest.raises(ParameterError):
        B.f2(0.6, 2, 2)


# ---------------------------------------------------------------------------
# Holevo quantity
# ---------------------------------------------------------------------------


def _basis_ensemble(d=2):
    return H.Ensemble(np.ones(d) / d, np.eye(d))


def test_holevo_ensemble_examples():
    assert H.holevo_ensemble(C.identity(2), _basis_ensemble()) == pytest.approx(1.0, abs=1e-12)
    single = H.Ensemble([1.0], [[1, 0]])
    assert H.holevo_ensemble(C.amplitude_damping(0.2), single) == 0.0
    assert H.holevo_ensemble(C.completely_depolarizing(2), _basis_ensemble()) == pytest.approx(0, abs=1e-12)


def test_ensemble_validation():
    with pytest.raises(Exception):
        H.Ensemble([0.5, 0.6], np.eye(2))
    with pytest.raises(DimensionError):
        H.Ensemble(np.ones(5) / 5, np.ones((5, 2)) / np.sqrt(2))
    with pytest.raises(DimensionError):
        H.holevo_ensemble(C.identity(3), _basis_ensemble())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_holevo_ensemble_is_cq_mutual_information(seed, k):
    rng = np.random.default_rng(seed)
    ch = C.mix_ad_depol(float(rng.uniform()))
    e = H.Ensemble(rng.dirichlet(np.ones(k)), np.stack([la.haar_state(2, rng) for _ in range(k)]))
    out = C.apply_to_subsystem(ch, e.cq_state(), "A", new_label="B")
    chi = H.holevo_ensemble(ch, e)
    assert chi == pytest.approx(la.mutual_information(out, "X", "B"), abs=1e-10)
    assert chi <= 1 + 1e-12


def test_holevo_information_identity_and_constant():
    val, ens = H.holevo_information(C.identity(2), restarts=4)
    assert val == pytest.approx(1.0, abs=1e-9)
    assert len(ens) == 4
    val, _ = H.holevo_information(C.amplitude_damping(1.0), restarts=2)
    assert val == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.2, 0.6])
def test_holevo_information_restart_monotone(p):
    ch = C.mix_ad_depol(p)
    v1 = H.holevo_information(ch, restarts=3, seed=5)[0]
    v2 = H.holevo_information(ch, restarts=6, seed=5)[0]
    assert v2 >= v1


def test_holevo_information_returned_ensemble():
    ch = C.amplitude_damping(0.3)
    val, ens = H.holevo_information(ch, restarts=4)
    assert val == H.holevo_ensemble(ch, ens)


def test_holevo_generic_qutrit_path():
    # qutrit dephasing-free identity: log2(3) with 9-state ensembles
    val, ens = H.holevo_information(C.identity(3), restarts=2)
    assert len(ens) == 9
    assert val == pytest.approx(np.log2(3), abs=1e-4)


def test_holevo_generic_path_matches_bloch_path():
    # qubit -> qutrit embedding forces the generic objective; value equals the qubit one
    ch = C.amplitude_damping(0.3)
    embed = np.vstack([np.eye(2), np.zeros((1, 2))])
    wide = C.Channel(2, 3, tuple(embed @ k for k in ch.kraus))
    assert H.holevo_information(wide, restarts=4)[0] == pytest.approx(H.holevo_information(ch)[0], abs=1e-6)


def test_bloch_affine_examples():
    m, t = H.bloch_affine(C.amplitude_damping(0.36))
    np.testing.assert_allclose(m, np.diag([0.8, 0.8, 0.64]), atol=1e-14)
    np.testing.assert_allclose(t, [0, 0, 0.36], atol=1e-14)
    with pytest.raises(DimensionError):
        H.bloch_affine(C.identity(3))


def test_min_output_entropy():
    assert H.min_output_entropy(C.identity(2)) == pytest.approx(0, abs=1e-9)
    for p in (0.1, 0.4, 0.75):
        assert H.min_output_entropy(C.depolarizing_qubit(p)) == pytest.approx(h2(2 * p / 3), abs=1e-8)
    # line through the generic driver
    assert H.min_output_entropy(C.identity(3)) == pytest.approx(0, abs=1e-6)


def test_ampdamp_closed_form_examples():
    assert H.holevo_ampdamp_closed_form(0) == pytest.approx(1.0, abs=1e-10)
    assert H.holevo_ampdamp_closed_form(1) == pytest.approx(0.0, abs=1e-12)
    qs = np.linspace(0, 1, 1_000_001)
    p = 0.5
    root = np.sqrt(np.maximum(1 - 4 * p * (1 - p) * qs * qs, 0))
    vals = np.array([h2(x) for x in (1 - p) * qs[::10]]) - np.array([h2(x) for x in (1 + root[::10]) / 2])
    i = int(np.argmax(vals)) * 10
    dense = qs[max(i - 20, 0):i + 21]
    r = np.sqrt(np.maximum(1 - 4 * p * (1 - p) * dense * dense, 0))
    oracle = max(h2((1 - p) * q) - h2((1 + s) / 2) for q, s in zip(dense, r))
    assert H.holevo_ampdamp_closed_form(p) == pytest.approx(oracle, abs=1e-10)


def test_one_design_formula():
    for p in (0.2, 0.5):
        ch = C.depolarizing_qubit(p)
        assert H.holevo_one_design(ch, pauli_rep()) == pytest.approx(1 - h2(2 * p / 3), abs=1e-8)
    with pytest.raises(CovarianceError):
        H.holevo_one_design(C.amplitude_damping(0.3), pauli_rep())


def test_one_design_on_twirl_matches_search():
    tw = twirl_channel(C.mix_ad_depol(0.2), pauli_rep())
    assert H.holevo_one_design(tw, pauli_rep()) == pytest.approx(H.holevo_information(tw)[0], abs=1e-7)


# ---------------------------------------------------------------------------
# bound reports
# ---------------------------------------------------------------------------


def test_report_record_and_minimum():
    r = B.BoundReport("x", "eb", 0.1, 0.5, 0.9, 0.7, 0.2)
    assert r.upper_bound == 0.7
    assert r.to_record() == {"channel": "x", "method": "eb", "p": 0.2, "epsilon": 0.1, "holevo_lower": 0.5,
                             "upper_form_M": 0.9, "upper_form_N": 0.7, "upper_bound": 0.7}


def test_covariance_bound_mixture_example():
    ch = C.mix_ad_depol(0.3)
    rep = B.bound_covariance(ch, restarts=8)
    assert rep.epsilon == pytest.approx(0.045, abs=1e-6)
    chi_tw = H.holevo_information(twirl_channel(ch, pauli_rep()))[0]
    assert rep.upper_form_M == pytest.approx(chi_tw + 0.09 + _g_oracle(0.045), abs=1e-6)
    assert rep.upper_form_N == pytest.approx(rep.holevo_lower + 0.135 + 2 * _g_oracle(0.045), abs=1e-6)


def test_covariance_bound_ampdamp_half():
    rep = B.bound_covariance(C.amplitude_damping(0.5), restarts=8)
    assert rep.epsilon == pytest.approx(0.25, abs=1e-6)


def test_covariance_bound_exact():
    ch = C.depolarizing_qubit(0.3)
    rep = B.bound_covariance(ch, restarts=8)
    assert rep.epsilon <= 1e-7
    assert rep.upper_form_M == pytest.approx(rep.holevo_lower, abs=1e-5)
    rep = B.bound_covariance(ch, g=clifford1_rep(), restarts=8)
    assert rep.upper_bound == pytest.approx(rep.holevo_lower, abs=1e-5)
    with pytest.raises(DimensionError):
        B.bound_covariance(C.identity(3))


def test_eb_bound_examples():
    ch = C.ad_after_dephasing(0.5)
    rep = B.bound_eb(ch, restarts=8)
    assert rep.epsilon <= 1e-6
    assert rep.upper_form_M == pytest.approx(rep.holevo_lower, abs=1e-5)
    rep = B.bound_eb(C.ad_after_dephasing(0.3), restarts=8)
    e = rep.epsilon
    assert rep.upper_form_N == pytest.approx(rep.holevo_lower + 3 * e + 2 * _g_oracle(e), abs=1e-9)
    with pytest.raises(DimensionGuardError):
        B.bound_eb(C.stinespring(C.mix_ad_depol(0.2)).as_channel())


def test_hadamard_s_bound_examples():
    for ch in (C.dephasing_z(0.3), C.identity(2)):
        rep = B.bound_hadamard_s(ch, restarts=8)
        assert rep.epsilon <= 1e-6
        assert rep.upper_form_M == pytest.approx(rep.holevo_lower, abs=1e-5)
    assert B.bound_hadamard_s(C.identity(2), restarts=4).upper_bound == pytest.approx(1.0, abs=1e-5)
    rep = B.bound_hadamard_s(C.amplitude_damping(0.2), restarts=8)
    e = programs.hadamard_s_parameter(C.amplitude_damping(0.2))[0]
    assert rep.epsilon == pytest.approx(e, abs=1e-9)
    assert rep.upper_form_N == pytest.approx(rep.holevo_lower + 3 * e + 2 * _g_oracle(e), abs=1e-9)


def test_eps_hadamard_dephasing():
    rep = B.eps_hadamard_upper_bound(C.dephasing_z(0.3), restarts=8)
    assert rep.epsilon <= 1e-6
    assert rep.upper_bound >= rep.holevo_lower - 1e-6
    assert rep.upper_form_N is None


def test_eps_hadamard_unitary():
    u = la.haar_unitary(2, np.random.default_rng(3))
    rep = B.eps_hadamard_upper_bound(C.unitary_channel(u), restarts=4)
    assert rep.epsilon <= 1e-6
    assert rep.upper_bound >= 1 - 1e-6


@pytest.mark.parametrize("p", [0.1, 0.5])
def test_eps_hadamard_ampdamp_valid(p):
    rep = B.eps_hadamard_upper_bound(C.amplitude_damping(p), restarts=8)
    assert rep.upper_bound >= H.holevo_ampdamp_closed_form(p) - 1e-6


def test_eps_hadamard_base_via_xi_state():
    # second route: H(FE) - H(E|X) on the explicit xi state of the returned ensemble
    ch = C.minimal(C.amplitude_damping(0.3))
    _, deg, _ = programs.hadamard_deg_parameter(ch)
    d_map = C.kraus_from_choi(C.renormalize_choi(deg))
    base, ens = H.maximize_entropy_difference(ch, C.compose(d_map, ch), restarts=4)
    xi = B.xi_state(ch, d_map, ens)
    direct = la.entropic(xi, "H(FE)") - la.entropic(xi, "H(E|X)")
    assert direct == pytest.approx(base, abs=1e-9)
    rep = B.eps_hadamard_upper_bound(ch, restarts=4)
    assert rep.components["base"] == pytest.approx(base, abs=1e-9)


def test_eps_hadamard_guard():
    with pytest.raises(DimensionGuardError):
        B.eps_hadamard_upper_bound(C.mix_ad_depol(0.2))


def test_c_beta_report():
    rep = B.c_beta_report(C.amplitude_damping(0.4), restarts=4)
    assert rep.upper_bound == pytest.approx(np.log2(1 + np.sqrt(0.6)), abs=1e-7)
    assert rep.epsilon is None


def test_c_beta_dominates_holevo():
    rng = np.random.default_rng(8)
    chans = [fam(p) for fam in (C.amplitude_damping, C.mix_ad_depol, C.ad_after_dephasing, C.dephasing_z)
             for p in (0.1, 0.5, 0.9)]
    v = la.haar_unitary(6, rng)[:, :2]
    chans.append(C.Channel(2, 2, tuple(v.reshape(2, 3, 2).transpose(1, 0, 2))))
    for ch in chans:
        assert programs.c_beta(ch) >= H.holevo_information(ch, restarts=8)[0] - 1e-4


@settings(max_examples=6, deadline=None)
@given(st.sampled_from(sorted(B.BOUND_METHODS)), st.floats(0, 1),
       st.sampled_from([C.amplitude_damping, C.dephasing_z, C.ad_after_dephasing]))
def test_reports_upper_above_lower(method, p, fam):
    rep = B.BOUND_METHODS[method](fam(p), restarts=4)
    assert rep.upper_bound >= rep.holevo_lower - 1e-6


# ---------------------------------------------------------------------------
# trade-off region
# ---------------------------------------------------------------------------


def test_tradeoff_identity_phi():
    phi = H.Ensemble([1.0], [np.array([1, 0, 0, 1]) / np.sqrt(2)])
    (pt,) = B.tradeoff_outer(C.identity(2), 0.0, [phi])
    assert pt.rhs_cq == pytest.approx(2.0, abs=1e-10)
    assert pt.rhs_qe == pytest.approx(1.0, abs=1e-10)  # I(A>B) of Phi
    assert pt.rhs_cqe == pytest.approx(1.0, abs=1e-10)
    assert pt.sampled


def test_tradeoff_offsets_and_envelope():
    rng = np.random.default_rng(9)
    ens = [B.random_bipartite_ensemble(2, 2, 3, rng) for _ in range(5)]
    ch = C.dephasing_z(0.2)
    eps = 0.01
    pts = B.tradeoff_outer(ch, eps, ens)
    base = B.tradeoff_outer(ch, 0.0, ens)
    for a, b in zip(pts, base):
        assert a.rhs_cq - b.rhs_cq == pytest.approx(B.f1(eps, 2), abs=1e-12)
        assert a.rhs_qe - b.rhs_qe == pytest.approx(B.f2(eps, 2, 2), abs=1e-12)
    env = B.tradeoff_envelope(pts)
    assert env["sampled"] and env["samples"] == 5
    assert env["rhs_cq"] == max(p.rhs_cq for p in pts)


def test_tau_state_labels_and_trace():
    rng = np.random.default_rng(10)
    tau = B.tau_state(C.amplitude_damping(0.3), B.random_bipartite_ensemble(2, 2, 2, rng))
    assert tau.labels == ("X", "A", "B")
    assert np.trace(tau.matrix).real == pytest.approx(1.0)


def test_tradeoff_needs_hadamard():
    phi = H.Ensemble([1.0], [np.array([1, 0, 0, 1]) / np.sqrt(2)])
    with pytest.raises(ParameterError):
        B.tradeoff_outer(C.amplitude_damping(0.3), 0.0, [phi])

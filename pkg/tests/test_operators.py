import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from weakdamp.operators import (apply_superop, choi_matrix, commutator_superop, dissipator_superop,
                                lindblad_form_margin, projector, pure_state, spost, spre, sprepost,
                                trace_row, transition_op, unvectorize, vectorize)


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_vectorize_identity_half():
    np.testing.assert_array_equal(vectorize(np.eye(2) / 2), [0.5, 0, 0, 0.5])


def test_vectorize_is_column_stacking():
    # |0><1| sits in column 1, row 0 -> slot 2
    v = vectorize(transition_op(2, 0, 1))
    np.testing.assert_array_equal(v, [0, 0, 1, 0])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31))
def test_vectorize_round_trip(d, seed):
    rho = random_density(np.random.default_rng(seed), d)
    np.testing.assert_array_equal(unvectorize(vectorize(rho)), rho)


def test_unvectorize_rejects_non_square_length():
    with pytest.raises(ValueError):
        unvectorize(np.zeros(5))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_pre_post_superops_match_matrix_products(d, seed):
    rng = np.random.default_rng(seed)
    a, b, x = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(3))
    np.testing.assert_allclose(apply_superop(spre(a), x), a @ x, atol=1e-12)
    np.testing.assert_allclose(apply_superop(spost(b), x), x @ b, atol=1e-12)
    np.testing.assert_allclose(apply_superop(sprepost(a, b), x), a @ x @ b, atol=1e-12)


def test_zero_dissipator_and_commutator():
    assert not np.any(dissipator_superop(np.zeros((3, 3))))
    assert not np.any(commutator_superop(np.zeros((3, 3))))


def test_dissipator_population_transfer():
    gamma = 0.3
    c = np.sqrt(gamma) * transition_op(2, 0, 1)
    drho = apply_superop(dissipator_superop(c), projector(2, 1))
    assert drho[1, 1] == pytest.approx(-gamma)
    assert drho[0, 0] == pytest.approx(gamma)


def test_dissipator_coherence_decays_at_half_rate():
    gamma = 0.3
    c = np.sqrt(gamma) * transition_op(2, 0, 1)
    plus = pure_state(np.array([1, 1]) / np.sqrt(2))
    drho = apply_superop(dissipator_superop(c), plus)
    assert drho[0, 1] / plus[0, 1] == pytest.approx(-gamma / 2)


def test_commutator_rotates_coherence_at_level_splitting():
    w = 1.7
    h = np.diag([-w / 2, w / 2])
    plus = pure_state(np.array([1, 1]) / np.sqrt(2))
    t = 0.9
    rho_t = apply_superop(expm(commutator_superop(h) * t), plus)
    assert rho_t[0, 1] == pytest.approx(0.5 * np.exp(1j * w * t))


def test_commutator_output_is_traceless():
    rng = np.random.default_rng(1)
    h = rng.normal(size=(4, 4))
    h = h + h.T
    out = apply_superop(commutator_superop(h), random_density(rng, 4))
    assert abs(np.trace(out)) < 1e-12


def test_commutator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        commutator_superop(np.array([[0, 1], [0, 0]]))


def test_lindblad_generators_are_trace_preserving():
    rng = np.random.default_rng(2)
    c = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = rng.normal(size=(3, 3))
    gen = commutator_superop(h + h.T) + dissipator_superop(c)
    np.testing.assert_allclose(trace_row(3) @ gen, 0, atol=1e-12)


def test_choi_of_identity_channel_is_maximally_entangled():
    choi = choi_matrix(np.eye(4))
    assert np.linalg.matrix_rank(choi) == 1
    assert np.trace(choi).real == pytest.approx(2)


def test_lindblad_form_margin_sign():
    c = transition_op(2, 0, 1)
    assert lindblad_form_margin(dissipator_superop(c)) > -1e-12
    assert lindblad_form_margin(-dissipator_superop(c)) < -1e-3

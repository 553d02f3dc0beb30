import math

import numpy as np
import pytest
from scipy.linalg import expm

from weakdamp.bath import Flat, Ohmic
from weakdamp.oracle import (RevivalError, SectorError, SingleExcitationOracle, default_mode_count,
                             discretize_bath, evolve_single_excitation)
from weakdamp.system import build_rate_table, two_level, v_system

PI = math.pi
W = 80 * PI


def test_single_mode_flat_bath():
    db = discretize_bath(Flat(cutoff=W, level=0.01), 1)
    np.testing.assert_allclose(db.frequencies, [W / 2])
    assert db.couplings(2.0)[0] ** 2 == pytest.approx(4.0 * 0.01 * W)


def test_mode_weights_integrate_spectrum():
    db = discretize_bath(Ohmic(cutoff=W), 10_000)
    # int_0^W w/W^2 dw = 1/2
    assert np.sum(db.couplings(1.0) ** 2) == pytest.approx(0.5, rel=1e-3)


def test_revival_arithmetic():
    db = discretize_bath(Ohmic(cutoff=W), 4000)
    assert db.revival_time == pytest.approx(100.0)
    assert db.revival_time >= 3 * 30


def test_too_few_modes_raise_revival_error():
    with pytest.raises(RevivalError):
        SingleExcitationOracle(two_level(10 * PI, gamma=0.1), Ohmic(cutoff=W),
                               np.linspace(0, 30, 31), [1], n_modes=1000)


def test_thermal_bath_rejected():
    with pytest.raises(ValueError):
        discretize_bath(Ohmic(cutoff=W, temperature=1.0), 100)


def test_zero_coupling_keeps_amplitudes():
    sys = v_system(10.0, 12.0, couplings=(0.0, 0.0))
    psi = np.array([0, 0.6, 0.8j])
    t = np.linspace(0, 3, 31)
    res = evolve_single_excitation(sys, Ohmic(cutoff=W), psi, t)
    np.testing.assert_allclose(res.population(1), 0.36, atol=1e-12)
    np.testing.assert_allclose(np.abs(res.element(1, 2)), 0.48, atol=1e-12)


def test_unitary_sector_matches_dense_expm():
    # small bath: compare the sparse Krylov propagator with a dense matrix exponential
    sys = v_system(10.0, 11.0, couplings=(2.0, 1.0))
    t = np.linspace(0, 2, 5)
    o = SingleExcitationOracle(sys, Ohmic(cutoff=W), t, [1, 2], n_modes=200, safety=0.0)
    h = o._hamiltonian(0.0).toarray()
    psi0 = np.zeros(h.shape[0], complex)
    psi0[1] = 1
    for k, tk in enumerate(t):
        ref = expm(-1j * h * tk) @ psi0
        np.testing.assert_allclose(o.u_excited[k][:, 1], ref[:2], atol=1e-10)
    assert o.norm_error < 1e-10


def test_wigner_weisskopf_decay():
    gamma = 0.1
    t = np.linspace(0, 30, 301)
    res = evolve_single_excitation(two_level(10 * PI, gamma=gamma), Ohmic(cutoff=W), np.array([0, 1.0]), t,
                                   n_modes=4000)
    assert np.abs(res.population(1) - np.exp(-gamma * t)).max() < 2e-3


def test_lamb_shift_sign_from_exact_phase():
    # the excited amplitude rotates at w0 - Delta with Delta = |g|^2 P int J/(x - w0)
    w0, gamma = 10 * PI, 0.1
    sys = two_level(w0, gamma=gamma)
    t = np.linspace(0, 20, 201)
    o = SingleExcitationOracle(sys, Ohmic(cutoff=W), t, [1])
    phase = np.unwrap(np.angle(o.u_excited[:, 0, 0]))
    late = t > 5
    freq = -np.polyfit(t[late], phase[late], 1)[0]
    delta = build_rate_table(sys, Ohmic(cutoff=W)).delta[0]
    assert freq == pytest.approx(w0 - delta, abs=0.02 * delta)


def test_dark_state_does_not_decay():
    sys = v_system(3 * PI, 3 * PI, gamma1=0.1, gamma2=0.1)
    t = np.linspace(0, 30, 61)
    res = evolve_single_excitation(sys, Ohmic(cutoff=W), np.array([0, 1, -1]) / math.sqrt(2), t)
    loss = 1 - (res.population(1) + res.population(2))
    assert loss.max() < 1e-3


def test_reduced_is_linear_in_initial_state():
    sys = v_system(10.0, 10.5, couplings=(2.0, 1.0))
    t = np.linspace(0, 5, 11)
    o = SingleExcitationOracle(sys, Ohmic(cutoff=W), t, [1, 2])
    a = np.diag([0, 1.0, 0])
    b = np.zeros((3, 3), complex)
    b[1, 2], b[2, 1] = 1j, -1j
    np.testing.assert_allclose(o.reduced(a + 0.3 * b).states,
                               o.reduced(a).states + 0.3 * o.reduced(b).states, atol=1e-13)


def test_state_outside_sector_rejected():
    sys = v_system(10.0, 10.5, couplings=(2.0, 1.0))
    with pytest.raises(SectorError):
        evolve_single_excitation(sys, Ohmic(cutoff=W), np.array([1, 1, 0]) / math.sqrt(2),
                                 np.linspace(0, 1, 3))


def test_default_mode_count():
    assert default_mode_count(W, 30.0) == math.ceil(3 * W * 30 / (2 * PI))

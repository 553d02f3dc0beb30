import math

import numpy as np
import pytest

from weakdamp.bath import Ohmic
from weakdamp.generators import build_generator
from weakdamp.operators import commutator_superop, pure_state
from weakdamp.propagation import propagate_fixed
from weakdamp.system import build_rate_table, two_level, v_system
from weakdamp.trajectories import TrajectoryConfig, jump_operators, run_ensemble, trajectory_rng

PI = math.pi
W = 80 * PI


def test_jump_operator_counts():
    bath = Ohmic(cutoff=W)
    one = jump_operators(build_rate_table(two_level(10.0, gamma=0.1), bath))
    assert len(one) == 1
    np.testing.assert_allclose(one[0], math.sqrt(0.1) * np.array([[0, 1], [0, 0]]))
    vee = build_rate_table(v_system(10.0, 10.5, gamma1=0.1, gamma2=0.05), bath)
    assert len(jump_operators(vee)) == 1
    hot = build_rate_table(v_system(10.0, 10.5, gamma1=0.1, gamma2=0.05), bath.with_temperature(3.0))
    assert len(jump_operators(hot)) == 2


def test_zero_coupling_is_unitary():
    sys = v_system(10.0, 10.5, couplings=(0.0, 0.0))
    psi = np.array([0.6, 0.8, 0], dtype=complex)
    t = np.linspace(0, 2, 21)
    res = run_ensemble(sys, build_rate_table(sys, Ohmic(cutoff=W)), psi, t, TrajectoryConfig(5, 0.01))
    ref = propagate_fixed(commutator_superop(sys.hamiltonian()), pure_state(psi), t)
    np.testing.assert_allclose(res.states, ref.states, atol=1e-12)


def test_dark_state_never_jumps():
    sys = v_system(3 * PI, 3 * PI, gamma1=0.1, gamma2=0.1)
    dark = np.array([0, 1, -1]) / math.sqrt(2)
    t = np.linspace(0, 10, 11)
    res = run_ensemble(sys, build_rate_table(sys, Ohmic(cutoff=W)), dark, t, TrajectoryConfig(50, 0.05))
    np.testing.assert_allclose(res.population(0), 0, atol=1e-12)
    assert np.abs(res.states - pure_state(dark)).max() < 1e-9


def test_two_level_within_binomial_bounds():
    gamma = 0.2
    sys = two_level(10.0, gamma=gamma)
    t = np.linspace(0, 10, 21)
    n = 4000
    res = run_ensemble(sys, build_rate_table(sys, Ohmic(cutoff=W)), np.array([0, 1.0]), t,
                       TrajectoryConfig(n, 0.005, seed=11))
    p = np.exp(-gamma * t)
    sigma = np.sqrt(p * (1 - p) / n) + 1e-12
    # first-order scheme bias is O(gamma dt); allow it on top of 3 sigma
    assert np.all(np.abs(res.population(1) - p) <= 3 * sigma + gamma * 0.005)


def test_reproducible_and_seed_dependent():
    sys = v_system(10.0, 10.3, gamma1=0.1, gamma2=0.05)
    rt = build_rate_table(sys, Ohmic(cutoff=W))
    psi = np.array([0, 0, 1.0])
    t = np.linspace(0, 5, 11)
    a = run_ensemble(sys, rt, psi, t, TrajectoryConfig(100, 0.01, seed=7))
    b = run_ensemble(sys, rt, psi, t, TrajectoryConfig(100, 0.01, seed=7))
    c = run_ensemble(sys, rt, psi, t, TrajectoryConfig(100, 0.01, seed=8))
    np.testing.assert_array_equal(a.states, b.states)
    assert np.abs(a.states - c.states).max() > 0


def test_trajectory_streams_are_independent_of_ensemble_size():
    assert trajectory_rng(5, 3).random() == trajectory_rng(5, 3).random()
    assert trajectory_rng(5, 3).random() != trajectory_rng(5, 4).random()


def test_v_system_tracks_master_equation():
    sys = v_system(10.0, 10.3, gamma1=0.1, gamma2=0.05)
    bath = Ohmic(cutoff=W)
    psi = np.array([0, 1, 1j]) / math.sqrt(2)
    t = np.linspace(0, 10, 21)
    res = run_ensemble(sys, build_rate_table(sys, bath), psi, t, TrajectoryConfig(2000, 0.01, seed=1))
    ref = propagate_fixed(build_generator("lindblad", sys, bath), pure_state(psi), t)
    assert np.abs(res.states - ref.states).max() < 5e-2


def test_large_step_warns_and_huge_step_raises():
    sys = two_level(10.0, gamma=0.5)
    rt = build_rate_table(sys, Ohmic(cutoff=W))
    psi = np.array([0, 1.0])
    with pytest.warns(RuntimeWarning):
        run_ensemble(sys, rt, psi, np.linspace(0, 1, 3), TrajectoryConfig(2, 0.5))
    with pytest.raises(ValueError):
        run_ensemble(sys, rt, psi, np.linspace(0, 4, 3), TrajectoryConfig(2, 2.0))


def test_output_grid_must_be_multiple_of_step():
    sys = two_level(10.0, gamma=0.1)
    with pytest.raises(ValueError):
        run_ensemble(sys, build_rate_table(sys, Ohmic(cutoff=W)), np.array([0, 1.0]),
                     np.linspace(0, 1, 4), TrajectoryConfig(2, 0.1))


def test_config_validation():
    with pytest.raises(ValueError):
        TrajectoryConfig(0, 0.1)
    with pytest.raises(ValueError):
        TrajectoryConfig(1, 0.1, seed=-1)

"""Monte Carlo wave-function unravelling of the all-regimes Lindblad equation.

First-order jump scheme: each step applies exp(-i H_eff dt) to the
unnormalised state; a jump happens once the squared norm drops below a
uniform random threshold drawn after the previous jump.  The jump operator is
chosen with probability proportional to ||c psi||^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .generators import collective_jumps, lamb_hamiltonian
from .propagation import EvolutionResult, _step
from .system import RateTable, SystemSpec

WARN_JUMP_PROBABILITY = 0.1
MAX_JUMP_PROBABILITY = 0.5


@dataclass(frozen=True)
class TrajectoryConfig:
    n_traj: int
    dt: float
    seed: int = 0
    # renormalisation guard: states with squared norm below this are treated as jumped
    norm_floor: float = 1e-300

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be at least 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def jump_operators(rates: RateTable) -> list[np.ndarray]:
    """Collective jumps: one operator at T = 0, two at T > 0."""
    return [c for c in collective_jumps(rates) if np.any(c)]


def effective_hamiltonian(system: SystemSpec, rates: RateTable, t: float = 0.0) -> np.ndarray:
    h = system.hamiltonian(t) + lamb_hamiltonian(rates)
    for c in jump_operators(rates):
        h = h - 0.5j * (c.conj().T @ c)
    return h


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one trajectory, fixed by (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_ensemble(system: SystemSpec, rates: RateTable, psi0: np.ndarray, times: Sequence[float],
                 config: TrajectoryConfig) -> EvolutionResult:
    """Average |psi><psi| over ``config.n_traj`` jump trajectories.

    ``times`` must be a uniform grid whose spacing is an integer multiple of
    ``config.dt``.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("initial state must be normalized")
    times = np.asarray(times, dtype=float)
    grid_dt = _step(times)
    sub = max(1, int(round(grid_dt / config.dt))) if times.size > 1 else 1
    if times.size > 1 and abs(sub * config.dt - grid_dt) > 1e-9 * grid_dt:
        raise ValueError("output spacing must be a multiple of dt")
    dt = grid_dt / sub if times.size > 1 else config.dt

    jumps = jump_operators(rates)
    h_eff = effective_hamiltonian(system, rates)
    decay = sum((c.conj().T @ c for c in jumps), np.zeros_like(h_eff))
    rate_max = float(np.linalg.eigvalsh(0.5 * (decay + decay.conj().T)).max()) if jumps else 0.0
    p_jump = rate_max * dt
    if p_jump > MAX_JUMP_PROBABILITY:
        raise ValueError(f"jump probability per step {p_jump:.3g} exceeds {MAX_JUMP_PROBABILITY}")
    if p_jump > WARN_JUMP_PROBABILITY:
        warnings.warn(f"jump probability per step {p_jump:.3g} is large; reduce dt", RuntimeWarning)

    step_t = expm(-1j * h_eff * dt).T
    rngs = [trajectory_rng(config.seed, i) for i in range(config.n_traj)]
    psi = np.tile(psi0, (config.n_traj, 1))
    threshold = np.array([r.random() for r in rngs])
    d = system.dim
    out = np.empty((times.size, d, d), dtype=complex)
    out[0] = np.outer(psi0, psi0.conj())
    for k in range(1, times.size):
        for _ in range(sub):
            psi = psi @ step_t
            norm2 = np.einsum("ij,ij->i", psi.conj(), psi).real
            hit = np.flatnonzero(norm2 <= threshold) if jumps else ()
            for i in hit:
                psi[i] = _collapse(psi[i], jumps, rngs[i], config.norm_floor)
                threshold[i] = rngs[i].random()
        phi = psi / np.sqrt(np.einsum("ij,ij->i", psi.conj(), psi).real)[:, None]
        out[k] = np.einsum("ia,ib->ab", phi, phi.conj()) / config.n_traj
    return EvolutionResult(times, out)


def _collapse(psi: np.ndarray, jumps: list[np.ndarray], rng: np.random.Generator,
              floor: float) -> np.ndarray:
    weights = np.array([np.vdot(c @ psi, c @ psi).real for c in jumps])
    total = weights.sum()
    if total > floor:
        psi = jumps[rng.choice(len(jumps), p=weights / total)] @ psi
    return psi / math.sqrt(float(np.vdot(psi, psi).real))

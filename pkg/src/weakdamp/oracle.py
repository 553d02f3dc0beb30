"""Reference dynamics from an explicitly discretized zero-temperature bath.

The rotating-wave system-bath Hamiltonian conserves the number of
excitations.  Starting from a state with one excitation in the system and the
bath in its vacuum, the dynamics stays in the span of

    |e, vac>     e an excited system level
    |g, 1_k>     g a ground level, one quantum in bath mode k

so the full problem reduces to a sparse Hamiltonian of size
``n_excited + n_ground * N`` that is evolved exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .bath import Bath
from .propagation import EvolutionResult, _step
from .system import SystemSpec

DEFAULT_SAFETY = 3.0


class RevivalError(ValueError):
    """The discretized bath would return energy to the system within the horizon."""


class SectorError(ValueError):
    """Initial state or system does not fit the single-excitation sector."""


@dataclass(frozen=True)
class DiscretizedBath:
    frequencies: np.ndarray  # midpoints (k - 1/2) * dw
    weights: np.ndarray      # sqrt(J(w_k) dw); mode coupling is g * weight
    cutoff: float

    @property
    def n_modes(self) -> int:
        return self.frequencies.size

    @property
    def spacing(self) -> float:
        return self.cutoff / self.n_modes

    @property
    def revival_time(self) -> float:
        return 2 * math.pi / self.spacing

    def couplings(self, g: complex = 1.0) -> np.ndarray:
        return g * self.weights

    def to_csv(self, path: str | Path, g: complex = 1.0) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "coupling"])
            for om, c in zip(self.frequencies, np.abs(self.couplings(g))):
                w.writerow([repr(float(om)), repr(float(c))])


def discretize_bath(bath: Bath, n_modes: int) -> DiscretizedBath:
    """Midpoint-rule discretization of the bath on (0, cutoff]."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if bath.temperature != 0:
        raise ValueError("the discretized-bath oracle is zero-temperature only")
    dw = bath.cutoff / n_modes
    w = (np.arange(n_modes) + 0.5) * dw
    return DiscretizedBath(w, np.sqrt(np.asarray(bath.density(w)) * dw), bath.cutoff)


def default_mode_count(cutoff: float, horizon: float, safety: float = DEFAULT_SAFETY) -> int:
    return max(1, math.ceil(safety * cutoff * horizon / (2 * math.pi)))


def _sector(system: SystemSpec, support: Sequence[int]) -> tuple[list[int], list[int]]:
    """Close the initial support into (excited, ground) level lists."""
    excited, ground = set(support), set()
    h = system.h_extra_at(0.0)

    def mixed(levels):
        if h is None:
            return set()
        return {b for a in levels for b in range(system.dim) if b != a and abs(h[a, b]) > 0}

    changed = True
    while changed:
        n0 = len(excited) + len(ground)
        excited |= mixed(excited)
        ground |= mixed(ground)
        for tr in system.transitions:
            if tr.upper in excited:
                ground.add(tr.lower)
            if tr.lower in ground:
                excited.add(tr.upper)
        changed = len(excited) + len(ground) != n0
    if excited & ground:
        raise SectorError("a level is both excited and ground; state is not single-excitation")
    return sorted(excited), sorted(ground)


class SingleExcitationOracle:
    """Exact single-excitation propagator for a system coupled to a discretized bath.

    The propagator is computed once for every excited basis state, so
    :meth:`reduced` returns the reduced dynamics of any initial density
    matrix supported on the excited levels (the map is linear).
    """

    def __init__(self, system: SystemSpec, bath: Bath, times: Sequence[float],
                 support: Sequence[int], *, n_modes: int | None = None,
                 safety: float = DEFAULT_SAFETY):
        times = np.asarray(times, dtype=float)
        dt = _step(times)
        if times[0] != 0:
            raise ValueError("time grid must start at 0")
        horizon = float(times[-1])
        if n_modes is None:
            n_modes = default_mode_count(bath.cutoff, horizon, safety)
        self.dbath = discretize_bath(bath, n_modes)
        if self.dbath.revival_time < safety * horizon:
            raise RevivalError(
                f"revival time {self.dbath.revival_time:.4g} shorter than {safety} x horizon {horizon:.4g}; "
                f"use at least {default_mode_count(bath.cutoff, horizon, safety)} modes")
        self.system, self.times = system, times
        self.excited, self.ground = _sector(system, support)
        self.g = system.couplings(bath)
        self._evolve(dt)

    # layout: excited levels first, then ground-level blocks of N modes each
    def _hamiltonian(self, t: float) -> sparse.csr_matrix:
        sys, E, G, N = self.system, self.excited, self.ground, self.dbath.n_modes
        h = sys.hamiltonian(t)
        ne = len(E)
        mode_block = (sparse.kron(sparse.csr_matrix(h[np.ix_(G, G)]), sparse.identity(N))
                      + sparse.kron(sparse.identity(len(G)), sparse.diags(self.dbath.frequencies)))
        rows, cols, vals = [], [], []
        w = self.dbath.weights
        for g, tr in zip(self.g, sys.transitions):
            if tr.upper not in E:
                continue
            e, gi = E.index(tr.upper), G.index(tr.lower)
            rows.append(ne + gi * N + np.arange(N))
            cols.append(np.full(N, e))
            vals.append(g * w)
        dim = ne + len(G) * N
        if rows:
            r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
            couple = sparse.coo_matrix((v, (r, c)), shape=(dim, dim))
        else:
            couple = sparse.coo_matrix((dim, dim), dtype=complex)
        diag = sparse.block_diag([sparse.csr_matrix(h[np.ix_(E, E)]), mode_block])
        return (diag + couple + couple.getH()).tocsr()

    def _evolve(self, dt: float) -> None:
        ne, nt = len(self.excited), self.times.size
        dim = ne + len(self.ground) * self.dbath.n_modes
        psi = np.zeros((dim, ne), dtype=complex)
        psi[np.arange(ne), np.arange(ne)] = 1.0
        if self.system.time_dependent:
            states = [psi]
            for k in range(1, nt):
                h = self._hamiltonian(0.5 * (self.times[k - 1] + self.times[k]))
                psi = expm_multiply(-1j * dt * h, psi)
                states.append(psi)
            states = np.array(states)
        else:
            h = self._hamiltonian(0.0)
            states = expm_multiply(-1j * h, psi, start=self.times[0], stop=self.times[-1],
                                   num=nt, endpoint=True)
        self.u_excited = states[:, :ne, :]  # (nt, ne, ne)
        modes = states[:, ne:, :].reshape(nt, len(self.ground), self.dbath.n_modes, ne)
        self.gram = np.einsum("tgka,thkb->tghab", modes, modes.conj())
        self.norm_error = float(np.max(np.abs(
            np.sum(np.abs(states) ** 2, axis=1) - 1.0)))

    def reduced(self, rho0: np.ndarray) -> EvolutionResult:
        """Reduced system dynamics for an initial state on the excited levels."""
        rho0 = np.asarray(rho0, dtype=complex)
        E, G = self.excited, self.ground
        d = self.system.dim
        if rho0.shape != (d, d):
            raise ValueError("initial state has wrong shape")
        outside = np.ones(d, dtype=bool)
        outside[E] = False
        if np.any(np.abs(rho0[outside, :]) > 1e-12) or np.any(np.abs(rho0[:, outside]) > 1e-12):
            raise SectorError("initial state has weight outside the excited levels of the sector")
        r = rho0[np.ix_(E, E)]
        out = np.zeros((self.times.size, d, d), dtype=complex)
        u = self.u_excited
        ee = np.einsum("tab,bc,tdc->tad", u, r, u.conj())
        gg = np.einsum("tghab,ab->tgh", self.gram, r)
        out[np.ix_(np.arange(self.times.size), E, E)] = ee
        out[np.ix_(np.arange(self.times.size), G, G)] = gg
        return EvolutionResult(self.times, out)


def evolve_single_excitation(system: SystemSpec, bath: Bath, psi0: np.ndarray, times: Sequence[float], *,
                             n_modes: int | None = None, safety: float = DEFAULT_SAFETY) -> EvolutionResult:
    """Reduced dynamics of a pure single-excitation initial state."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("initial state must be normalized")
    support = [i for i in range(system.dim) if abs(psi0[i]) > 0]
    oracle = SingleExcitationOracle(system, bath, times, support, n_modes=n_modes, safety=safety)
    return oracle.reduced(np.outer(psi0, psi0.conj()))

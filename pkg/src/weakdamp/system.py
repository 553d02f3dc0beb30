"""System description and per-transition rate tables.

A :class:`SystemSpec` lists level energies, the transitions that couple to
the bath (each a lowering operator ``|lower><upper|`` with a complex
coupling), and an optional extra Hermitian term.  The bath couples to the
system through ``A = sum_j g_j sigma_j``.

When the extra term mixes levels, the bare transitions are no longer energy
eigen-transitions.  :func:`resolve_transitions` then diagonalises the system
Hamiltonian and expands ``A`` over the eigenbasis, keeping only the
energy-lowering components (the rotating-wave part).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .bath import Bath, coupling_for_rate, thermal_occupation
from .operators import is_hermitian, transition_op

# eigen-transition components smaller than this (relative to max |g|) are dropped
COMPONENT_TOL = 1e-12


@dataclass(frozen=True)
class Transition:
    """A bath-coupled transition ``|lower><upper|``.

    Give either ``coupling`` (complex g) or ``gamma``, a target decay rate.
    A target rate is inverted through the spectral density at ``gamma_at``,
    or at the transition's own frequency when ``gamma_at`` is None.
    ``phase`` is added to the coupling's argument.
    """

    lower: int
    upper: int
    coupling: complex | None = None
    gamma: float | None = None
    gamma_at: float | None = None
    phase: float = 0.0

    def __post_init__(self):
        if (self.coupling is None) == (self.gamma is None):
            raise ValueError("give exactly one of coupling or gamma")


@dataclass(frozen=True)
class SystemSpec:
    energies: tuple[float, ...]
    transitions: tuple[Transition, ...]
    h_extra: np.ndarray | None = field(default=None, compare=False)
    energies_t: Callable[[float], Sequence[float]] | None = field(default=None, compare=False)
    h_extra_t: Callable[[float], np.ndarray] | None = field(default=None, compare=False)
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        d = self.dim
        for tr in self.transitions:
            if not (0 <= tr.lower < d and 0 <= tr.upper < d) or tr.lower == tr.upper:
                raise ValueError(f"transition indices out of range: {tr}")
        if self.h_extra is not None:
            h = np.asarray(self.h_extra, dtype=complex)
            if h.shape != (d, d) or not is_hermitian(h):
                raise ValueError("h_extra must be a Hermitian dim x dim matrix")
            object.__setattr__(self, "h_extra", h)
        self._check_ordering(self.energies_at(0.0))

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def time_dependent(self) -> bool:
        return self.energies_t is not None or self.h_extra_t is not None

    def energies_at(self, t: float) -> np.ndarray:
        if self.energies_t is None:
            return np.array(self.energies)
        e = np.asarray(self.energies_t(t), dtype=float)
        if e.shape != (self.dim,):
            raise ValueError("energies_t returned wrong shape")
        return e

    def h_extra_at(self, t: float) -> np.ndarray | None:
        if self.h_extra_t is not None:
            return np.asarray(self.h_extra_t(t), dtype=complex)
        return self.h_extra

    def hamiltonian(self, t: float = 0.0) -> np.ndarray:
        h = np.diag(self.energies_at(t)).astype(complex)
        extra = self.h_extra_at(t)
        if extra is not None:
            h = h + extra
        return h

    def _check_ordering(self, energies):
        for tr in self.transitions:
            if not energies[tr.upper] > energies[tr.lower]:
                raise ValueError(f"transition {tr.lower}<-{tr.upper} is not energy-lowering")

    def bare_frequency(self, j: int, t: float = 0.0) -> float:
        e = self.energies_at(t)
        tr = self.transitions[j]
        return float(e[tr.upper] - e[tr.lower])

    def couplings(self, bath: Bath) -> np.ndarray:
        """Complex couplings g_j; target rates are inverted at t = 0."""
        out = []
        for j, tr in enumerate(self.transitions):
            if tr.coupling is not None:
                g = complex(tr.coupling)
            else:
                at = tr.gamma_at if tr.gamma_at is not None else self.bare_frequency(j)
                g = coupling_for_rate(bath, tr.gamma, at)
            out.append(g * np.exp(1j * tr.phase))
        return np.array(out, dtype=complex)

    def with_fixed_couplings(self, bath: Bath) -> "SystemSpec":
        """Copy with every target rate replaced by the coupling it implies."""
        gs = self.couplings(bath)
        trs = tuple(Transition(tr.lower, tr.upper, coupling=g) for tr, g in zip(self.transitions, gs))
        return replace(self, transitions=trs)

    def coupling_operator(self, bath: Bath) -> np.ndarray:
        """A = sum_j g_j sigma_j in the bare basis."""
        a = np.zeros((self.dim, self.dim), dtype=complex)
        for g, tr in zip(self.couplings(bath), self.transitions):
            a[tr.lower, tr.upper] += g
        return a


@dataclass(frozen=True)
class ResolvedTransition:
    sigma: np.ndarray  # unit lowering operator in the bare basis
    frequency: float
    coupling: complex


def resolve_transitions(system: SystemSpec, bath: Bath, t: float = 0.0,
                        couplings: np.ndarray | None = None) -> list[ResolvedTransition]:
    """Energy eigen-transitions of the system at time ``t``."""
    gs = system.couplings(bath) if couplings is None else np.asarray(couplings, dtype=complex)
    extra = system.h_extra_at(t)
    energies = system.energies_at(t)
    if extra is None or not np.any(extra):
        system._check_ordering(energies)
        out = []
        for g, tr in zip(gs, system.transitions):
            out.append(ResolvedTransition(
                transition_op(system.dim, tr.lower, tr.upper),
                float(energies[tr.upper] - energies[tr.lower]), complex(g)))
        return out

    a = np.zeros((system.dim, system.dim), dtype=complex)
    for g, tr in zip(gs, system.transitions):
        a[tr.lower, tr.upper] += g
    evals, vecs = np.linalg.eigh(system.hamiltonian(t))
    a_eig = vecs.conj().T @ a @ vecs
    scale = max(np.max(np.abs(gs), initial=0.0), 1e-300)
    out = []
    for n in range(system.dim):
        for m in range(system.dim):
            if evals[m] > evals[n] and abs(a_eig[n, m]) > COMPONENT_TOL * scale:
                sigma = np.outer(vecs[:, n], vecs[:, m].conj())
                out.append(ResolvedTransition(sigma, float(evals[m] - evals[n]), complex(a_eig[n, m])))
    return out


@dataclass
class RateTable:
    """Per-transition rates and shifts.

    ``decay`` holds R_j = pi J(w_j) and ``lamb`` holds I_j, the principal
    value integral, so that gamma_j = 2|g_j|^2 R_j and Delta_j = |g_j|^2 I_j.
    ``lamb_thermal`` is the thermal counterpart with Delta_j^T = |g_j|^2 of it.
    """

    frequency: np.ndarray
    coupling: np.ndarray
    decay: np.ndarray
    lamb: np.ndarray
    lamb_thermal: np.ndarray
    nbar: np.ndarray
    sigmas: np.ndarray  # shape (n_transitions, dim, dim)
    temperature: float = 0.0

    def __len__(self):
        return len(self.frequency)

    @property
    def dim(self) -> int:
        return self.sigmas.shape[-1]

    @property
    def gamma(self) -> np.ndarray:
        return 2.0 * np.abs(self.coupling) ** 2 * self.decay

    @property
    def delta(self) -> np.ndarray:
        return np.abs(self.coupling) ** 2 * self.lamb

    @property
    def delta_thermal(self) -> np.ndarray:
        return np.abs(self.coupling) ** 2 * self.lamb_thermal

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.coupling)

    # short aliases: R = J(w) * pi, I = P int J(x)/(x - w)
    R = property(lambda self: self.decay)
    I = property(lambda self: self.lamb)

    def rows(self) -> list[dict]:
        return [
            dict(frequency=float(self.frequency[j]), gamma=float(self.gamma[j]),
                 delta=float(self.delta[j]), delta_thermal=float(self.delta_thermal[j]),
                 nbar=float(self.nbar[j]), phase=float(self.phase[j]),
                 g=float(abs(self.coupling[j])), R=float(self.decay[j]), I=float(self.lamb[j]))
            for j in range(len(self))
        ]

    def with_values(self, decay=None, lamb=None) -> "RateTable":
        return replace(self,
                       decay=self.decay if decay is None else np.asarray(decay, dtype=float),
                       lamb=self.lamb if lamb is None else np.asarray(lamb, dtype=float))

    def subset(self, idx: Sequence[int]) -> "RateTable":
        idx = list(idx)
        return RateTable(self.frequency[idx], self.coupling[idx], self.decay[idx],
                         self.lamb[idx], self.lamb_thermal[idx], self.nbar[idx],
                         self.sigmas[idx], self.temperature)


def build_rate_table(system: SystemSpec, bath: Bath, *, t: float = 0.0,
                     anchor: float | None = None,
                     couplings: np.ndarray | None = None) -> RateTable:
    """Evaluate rates and Lamb shifts for every transition.

    With ``anchor`` set, the frequency-dependent integrals of every
    transition are evaluated at that single frequency (the degenerate
    construction); the transition operators and system energies are
    unaffected.
    """
    resolved = resolve_transitions(system, bath, t, couplings)
    d = system.dim
    n = len(resolved)
    freq = np.array([r.frequency for r in resolved], dtype=float)
    at = freq if anchor is None else np.full(n, float(anchor))
    decay = np.array([bath.decay_integral(w) for w in at])
    lamb = np.array([bath.lamb_integral(w) for w in at])
    lamb_t = np.array([bath.thermal_lamb_integral(w) for w in at])
    nbar = np.array([thermal_occupation(w, bath.temperature) for w in at]) if n else np.zeros(0)
    sigmas = np.array([r.sigma for r in resolved]).reshape(n, d, d)
    return RateTable(freq, np.array([r.coupling for r in resolved], dtype=complex),
                     decay, lamb, lamb_t, nbar, sigmas, bath.temperature)


def v_system(w1: float, w2: float, *, gamma1: float | None = None,
             gamma2: float | None = None, couplings: Sequence[complex] | None = None,
             gamma_at: float | None = None, phase: float = 0.0) -> SystemSpec:
    """Ground |0> and upper levels |1>, |2> with sigma_j = |0><j|."""
    if couplings is not None:
        trs = (Transition(0, 1, coupling=couplings[0]),
               Transition(0, 2, coupling=couplings[1], phase=phase))
    else:
        trs = (Transition(0, 1, gamma=gamma1, gamma_at=gamma_at),
               Transition(0, 2, gamma=gamma2, gamma_at=gamma_at, phase=phase))
    return SystemSpec((0.0, w1, w2), trs, labels=("0", "1", "2"))


def two_level(w0: float, *, gamma: float | None = None, coupling: complex | None = None) -> SystemSpec:
    return SystemSpec((0.0, w0), (Transition(0, 1, coupling=coupling, gamma=gamma),),
                      labels=("g", "e"))

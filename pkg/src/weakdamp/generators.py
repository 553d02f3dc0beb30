"""Master-equation generators as dense superoperators.

Conventions (hbar = 1).  For transition j write U_j = exp(i phi_j) sigma_j.
The all-regimes Lindblad generator is

    L rho = -i[H_sys + H_L, rho] + D[Theta] rho + D[Upsilon] rho

with Theta = sum_j sqrt(gamma_j (1 + n_j)) U_j, Upsilon = sum_j
sqrt(gamma_j n_j) U_j^dag and the Lamb-shift Hamiltonian

    H_L = -B^dag B + C C^dag,
    B = sum_j sqrt(Delta_j + Delta_j^T) U_j,   C = sum_j sqrt(Delta_j^T) U_j.

D is the decaying dissipator c rho c^dag - {c^dag c, rho}/2.  A positive
Lamb integral lowers the upper level, which is the sign produced by the
second-order energy shift of the rotating-wave Hamiltonian.

The Bloch-Redfield generator is assembled term by term from the complex
half-rates Gamma_k = R_k - i I_k (emission) without any symmetrisation; the
two routes coincide exactly when all Gamma_k are equal.
"""

from __future__ import annotations

import enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .bath import Bath
from .operators import (commutator_superop, dissipator_superop, spost, spre,
                        sprepost)
from .system import RateTable, SystemSpec, build_rate_table

DEFAULT_CLUSTER_THRESHOLD = 20.0


class GeneratorKind(str, enum.Enum):
    LINDBLAD = "lindblad"
    REDFIELD = "redfield"
    DEGENERATE = "degenerate"
    NONDEGENERATE = "nondegenerate"
    SECULAR = "secular"


def _unit_ops(rates: RateTable) -> np.ndarray:
    return np.exp(1j * rates.phase)[:, None, None] * rates.sigmas


def collective_ops(rates: RateTable) -> dict[str, np.ndarray]:
    """Collective jump and Lamb operators.

    Returns ``{"Sigma", "D"}`` at zero temperature and
    ``{"Theta", "Upsilon", "B", "C"}`` otherwise.
    """
    u = _unit_ops(rates)
    gamma, delta, delta_t, nbar = rates.gamma, rates.delta, rates.delta_thermal, rates.nbar

    def combo(weights, ops):
        if np.any(weights < 0):
            raise ValueError("negative radicand in collective operator (negative Lamb shift)")
        return np.einsum("j,jab->ab", np.sqrt(weights), ops) if len(weights) else np.zeros((rates.dim,) * 2, complex)

    if rates.temperature == 0:
        return {"Sigma": combo(gamma, u), "D": combo(delta, u)}
    udag = np.conj(np.transpose(u, (0, 2, 1)))
    return {
        "Theta": combo(gamma * (1 + nbar), u),
        "Upsilon": combo(gamma * nbar, udag),
        "B": combo(delta + delta_t, u),
        "C": combo(delta_t, u),
    }


def collective_jumps(rates: RateTable) -> list[np.ndarray]:
    """Jump operators of the all-regimes equation: Sigma at T = 0, else Theta and Upsilon."""
    u = _unit_ops(rates)
    if len(rates) == 0:
        return []
    w = np.sqrt(rates.gamma * (1 + rates.nbar))
    jumps = [np.einsum("j,jab->ab", w, u)]
    if rates.temperature > 0:
        udag = np.conj(np.transpose(u, (0, 2, 1)))
        jumps.append(np.einsum("j,jab->ab", np.sqrt(rates.gamma * rates.nbar), udag))
    return jumps


def _signed_geomean(x: np.ndarray) -> np.ndarray:
    """m_jk = sign * sqrt(|x_j x_k|) when x_j, x_k share a sign, else 0."""
    s = np.sign(x)
    root = np.sqrt(np.abs(x))
    return np.where(np.equal.outer(s, s), s[:, None] * np.outer(root, root), 0.0)


def lamb_hamiltonian(rates: RateTable) -> np.ndarray:
    """H_L = -B^dag B + C C^dag (sign-safe when a Lamb shift is negative)."""
    u = _unit_ops(rates)
    udag = np.conj(np.transpose(u, (0, 2, 1)))
    m_b = _signed_geomean(rates.delta + rates.delta_thermal)
    m_c = _signed_geomean(rates.delta_thermal)
    h = -np.einsum("jk,jab,kbc->ac", m_b, udag, u)
    h += np.einsum("jk,jab,kbc->ac", m_c, u, udag)
    return 0.5 * (h + h.conj().T)


def _collective_generator(system: SystemSpec, rates: RateTable,
                          clusters: Sequence[Sequence[int]], t: float) -> np.ndarray:
    h = system.hamiltonian(t)
    diss = np.zeros((system.dim**2,) * 2, dtype=complex)
    for members in clusters:
        sub = rates.subset(members)
        h = h + lamb_hamiltonian(sub)
        for c in collective_jumps(sub):
            if np.any(c):
                diss += dissipator_superop(c)
    return commutator_superop(0.5 * (h + h.conj().T)) + diss


def build_lindblad_all_regimes(system: SystemSpec, rates: RateTable, t: float = 0.0) -> np.ndarray:
    return _collective_generator(system, rates, [list(range(len(rates)))], t)


def build_partial_secular(system: SystemSpec, rates: RateTable,
                          clusters: Sequence[Sequence[int]], t: float = 0.0) -> np.ndarray:
    """All-regimes generator with cross terms between clusters dropped."""
    flat = sorted(i for c in clusters for i in c)
    if flat != list(range(len(rates))):
        raise ValueError("clusters must partition the transitions")
    return _collective_generator(system, rates, clusters, t)


def _redfield_channels(rates: RateTable):
    """(jump ops, complex half-rates) for the emission and absorption channels."""
    g = rates.coupling
    ops = g[:, None, None] * rates.sigmas
    emission = (ops, rates.decay * (1 + rates.nbar) - 1j * (rates.lamb + rates.lamb_thermal))
    if rates.temperature == 0:
        return [emission]
    absorb_ops = np.conj(np.transpose(ops, (0, 2, 1)))
    absorption = (absorb_ops, rates.decay * rates.nbar + 1j * rates.lamb_thermal)
    return [emission, absorption]


def _redfield_terms(system: SystemSpec, rates: RateTable, t: float, cross: bool) -> np.ndarray:
    out = commutator_superop(system.hamiltonian(t))
    n = len(rates)
    for ops, coef in _redfield_channels(rates):
        dag = np.conj(np.transpose(ops, (0, 2, 1)))
        for j in range(n):
            for k in range(n):
                if not cross and j != k:
                    continue
                c = coef[k]
                out += c * (sprepost(ops[k], dag[j]) - spre(dag[j] @ ops[k]))
                out += np.conj(c) * (sprepost(ops[j], dag[k]) - spost(dag[k] @ ops[j]))
    return out


def build_bloch_redfield(system: SystemSpec, rates: RateTable, t: float = 0.0) -> np.ndarray:
    """Full non-secular Bloch-Redfield generator (not necessarily CP)."""
    return _redfield_terms(system, rates, t, cross=True)


def build_nondegenerate(system: SystemSpec, rates: RateTable, t: float = 0.0) -> np.ndarray:
    """Independent dissipator and Lamb shift per transition, no cross terms."""
    return _redfield_terms(system, rates, t, cross=False)


def build_degenerate(system: SystemSpec, bath: Bath, anchor: float | None = None,
                     t: float = 0.0) -> np.ndarray:
    """Degenerate master equation: every transition uses the rates at ``anchor``.

    ``anchor`` defaults to the mean transition frequency.
    """
    if anchor is None:
        anchor = float(np.mean(build_rate_table(system, bath, t=t).frequency))
    rates = build_rate_table(system, bath, t=t, anchor=anchor)
    return build_lindblad_all_regimes(system, rates, t)


def cluster_transitions(rates: RateTable, threshold: float = DEFAULT_CLUSTER_THRESHOLD) -> list[list[int]]:
    """Group transitions whose detuning is within ``threshold`` coupling scales.

    j and k are linked when |w_j - w_k| <= threshold * max(sqrt|D_j D_k|,
    sqrt(g_j g_k)) with D the total Lamb shift and g the decay rate;
    clusters are the transitive closure of that relation.
    """
    n = len(rates)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    shift = np.abs(rates.delta + rates.delta_thermal)
    gamma = rates.gamma
    for j in range(n):
        for k in range(j + 1, n):
            scale = max(np.sqrt(shift[j] * shift[k]), np.sqrt(gamma[j] * gamma[k]))
            if abs(rates.frequency[j] - rates.frequency[k]) <= threshold * scale:
                parent[find(k)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def build_generator(kind: GeneratorKind | str, system: SystemSpec, bath: Bath, *,
                    t: float = 0.0, rates: RateTable | None = None,
                    clusters: Sequence[Sequence[int]] | None = None,
                    threshold: float = DEFAULT_CLUSTER_THRESHOLD,
                    anchor: float | None = None) -> np.ndarray:
    kind = GeneratorKind(kind)
    if kind is GeneratorKind.DEGENERATE:
        return build_degenerate(system, bath, anchor, t)
    if rates is None:
        rates = build_rate_table(system, bath, t=t)
    if kind is GeneratorKind.LINDBLAD:
        return build_lindblad_all_regimes(system, rates, t)
    if kind is GeneratorKind.REDFIELD:
        return build_bloch_redfield(system, rates, t)
    if kind is GeneratorKind.NONDEGENERATE:
        return build_nondegenerate(system, rates, t)
    if clusters is None:
        clusters = cluster_transitions(rates, threshold)
    return build_partial_secular(system, rates, clusters, t)


def save_generator(path: str | Path, generator: np.ndarray) -> None:
    """Write a superoperator as text: a ``dim N`` header, then N rows of
    ``re im`` pairs (row-major)."""
    n = generator.shape[0]
    with open(path, "w") as fh:
        fh.write("# weakdamp superoperator, column-stacked vectorization\n")
        fh.write(f"dim {n}\n")
        for row in generator:
            fh.write(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row) + "\n")


def load_generator(path: str | Path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if head[0] != "dim":
        raise ValueError("missing dim header")
    n = int(head[1])
    data = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
    if data.shape != (n, 2 * n):
        raise ValueError(f"expected {n} rows of {2 * n} numbers")
    return data[:, 0::2] + 1j * data[:, 1::2]

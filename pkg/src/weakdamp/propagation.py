"""Time evolution under fixed and adiabatically varying generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .bath import Bath
from .generators import GeneratorKind, build_generator, DEFAULT_CLUSTER_THRESHOLD
from .operators import unvectorize, vectorize
from .system import SystemSpec, build_rate_table


class NumericalError(RuntimeError):
    pass


class DegenerateKernelError(NumericalError):
    """Generator has more than one stationary state; all are attached."""

    def __init__(self, kernel: list[np.ndarray]):
        super().__init__(f"generator kernel has dimension {len(kernel)}")
        self.kernel = kernel


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray  # (n_times, dim, dim)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("one state per time point required")

    @property
    def dim(self) -> int:
        return self.states.shape[-1]

    @property
    def min_eigenvalues(self) -> np.ndarray:
        herm = 0.5 * (self.states + np.conj(np.transpose(self.states, (0, 2, 1))))
        return np.linalg.eigvalsh(herm)[:, 0]

    @property
    def traces(self) -> np.ndarray:
        return np.real(np.trace(self.states, axis1=1, axis2=2))

    @property
    def trace_drift(self) -> np.ndarray:
        return np.abs(self.traces - self.traces[0])

    def population(self, i: int) -> np.ndarray:
        return self.states[:, i, i].real

    def element(self, i: int, j: int) -> np.ndarray:
        return self.states[:, i, j]

    def to_csv(self, path: str | Path, metadata: dict | None = None) -> None:
        """Columns: time, re_ij/im_ij for every element (row-major), min_eig, trace."""
        d = self.dim
        header = ["time"]
        for i in range(d):
            for j in range(d):
                header += [f"re_{i}{j}", f"im_{i}{j}"]
        header += ["min_eig", "trace"]
        mins, traces = self.min_eigenvalues, self.traces
        with open(path, "w", newline="") as fh:
            for key, val in (metadata or {}).items():
                fh.write(f"# {key} = {val}\n")
            w = csv.writer(fh)
            w.writerow(header)
            for k, t in enumerate(self.times):
                flat = self.states[k].reshape(-1)
                row = [repr(float(t))]
                for z in flat:
                    row += [repr(float(z.real)), repr(float(z.imag))]
                row += [repr(float(mins[k])), repr(float(traces[k]))]
                w.writerow(row)


def read_csv(path: str | Path) -> EvolutionResult:
    with open(path) as fh:
        rows = [r for r in csv.reader(ln for ln in fh if not ln.startswith("#"))]
    header, data = rows[0], np.array(rows[1:], dtype=float)
    n_el = (len(header) - 3) // 2
    d = int(round(math.sqrt(n_el)))
    z = data[:, 1:1 + 2 * n_el:2] + 1j * data[:, 2:2 + 2 * n_el:2]
    return EvolutionResult(data[:, 0], z.reshape(-1, d, d))


def _step(times: np.ndarray) -> float:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("time grid must be a non-empty 1-d array")
    if times.size == 1:
        return 0.0
    diffs = np.diff(times)
    if np.any(diffs <= 0):
        raise ValueError("time grid must be strictly increasing")
    dt = float(diffs.mean())
    if np.max(np.abs(diffs - dt)) > 1e-9 * max(1.0, abs(times[-1])):
        raise ValueError("time grid must be uniform")
    return dt


def _check_rho(rho0: np.ndarray, dim: int) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (dim, dim):
        raise ValueError(f"initial state has shape {rho0.shape}, expected {(dim, dim)}")
    return rho0


def propagate_fixed(generator: np.ndarray, rho0: np.ndarray, times: Sequence[float]) -> EvolutionResult:
    """Exact exponential stepping: rho(t_{k+1}) = expm(L dt) rho(t_k)."""
    times = np.asarray(times, dtype=float)
    dt = _step(times)
    d = int(round(math.sqrt(generator.shape[0])))
    rho0 = _check_rho(rho0, d)
    prop = expm(generator * dt)
    if not np.all(np.isfinite(prop)):
        raise NumericalError("step propagator has non-finite entries")
    vec = vectorize(rho0)
    out = np.empty((times.size, d, d), dtype=complex)
    out[0] = rho0
    for k in range(1, times.size):
        vec = prop @ vec
        out[k] = unvectorize(vec)
    return EvolutionResult(times, out)


def propagate_adiabatic(system: SystemSpec, bath: Bath, rho0: np.ndarray, times: Sequence[float],
                        kind: GeneratorKind | str = GeneratorKind.LINDBLAD, *,
                        clusters=None, threshold: float = DEFAULT_CLUSTER_THRESHOLD) -> EvolutionResult:
    """Rebuild the generator at each step midpoint from the instantaneous system.

    Couplings g_j are fixed at their t = 0 values; frequencies, rates, Lamb
    shifts and (when the extra Hamiltonian mixes levels) the transition
    operators follow the instantaneous Hamiltonian.
    """
    times = np.asarray(times, dtype=float)
    _step(times)
    rho0 = _check_rho(rho0, system.dim)
    couplings = system.couplings(bath)
    vec = vectorize(rho0)
    out = np.empty((times.size, system.dim, system.dim), dtype=complex)
    out[0] = rho0
    for k in range(1, times.size):
        dt = times[k] - times[k - 1]
        tm = 0.5 * (times[k] + times[k - 1])
        rates = build_rate_table(system, bath, t=tm, couplings=couplings)
        gen = build_generator(kind, system, bath, t=tm, rates=rates,
                              clusters=clusters, threshold=threshold)
        vec = expm(gen * dt) @ vec
        if not np.all(np.isfinite(vec)):
            raise NumericalError(f"non-finite state at t = {times[k]}")
        out[k] = unvectorize(vec)
    return EvolutionResult(times, out)


def default_adiabatic_step(system: SystemSpec, times_per_period: int = 20) -> float:
    """Step resolving the largest level energy with ``times_per_period`` steps."""
    top = max(abs(e) for e in system.energies)
    return 2 * math.pi / (times_per_period * top)


@dataclass
class ErrorSummary:
    series: np.ndarray  # per-time mean absolute deviation over tracked elements
    mean: float         # time average of the series
    max: float          # max over time of the series
    max_element: float  # largest single-element deviation anywhere


def error_metric(a: EvolutionResult, b: EvolutionResult,
                 elements: Sequence[tuple[int, int]]) -> ErrorSummary:
    """Mean absolute deviation over tracked elements.

    ``(i, i)`` tracks a population; ``(i, j)`` with i != j tracks both the
    real and the imaginary part of that coherence.
    """
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise ValueError("trajectories are on different time grids")
    cols = []
    for i, j in elements:
        diff = a.states[:, i, j] - b.states[:, i, j]
        if i == j:
            cols.append(np.abs(diff.real))
        else:
            cols += [np.abs(diff.real), np.abs(diff.imag)]
    dev = np.stack(cols, axis=1)
    series = dev.mean(axis=1)
    return ErrorSummary(series, float(series.mean()), float(series.max()), float(dev.max()))


def max_population_error(a: EvolutionResult, b: EvolutionResult, levels: Sequence[int]) -> float:
    return error_metric(a, b, [(i, i) for i in levels]).max_element


def positivity_report(traj: EvolutionResult) -> float:
    """Most negative eigenvalue of rho encountered along the trajectory."""
    return float(traj.min_eigenvalues.min())


def steady_state(generator: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Unit-trace fixed point of the generator.

    Raises DegenerateKernelError when the kernel is not one-dimensional.
    """
    _, s, vh = np.linalg.svd(generator)
    null = vh[s <= tol * s[0]].conj() if s[0] > 0 else vh.conj()
    if null.shape[0] == 0:
        raise NumericalError("generator has no stationary state")
    kernel = []
    for v in null:
        m = unvectorize(v)
        tr = np.trace(m)
        m = m / tr if abs(tr) > 1e-12 else m
        kernel.append(0.5 * (m + m.conj().T))
    if len(kernel) != 1:
        raise DegenerateKernelError(kernel)
    return kernel[0]

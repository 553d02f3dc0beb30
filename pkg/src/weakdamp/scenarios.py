"""Built-in model systems, comparison runs and rate fitting."""

from __future__ import annotations

import configparser
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .bath import Bath, Ohmic, PiecewiseLinear, coupling_for_rate
from .generators import GeneratorKind, build_generator
from .oracle import SingleExcitationOracle, default_mode_count
from .operators import pure_state
from .propagation import (ErrorSummary, EvolutionResult, NumericalError, error_metric,
                          positivity_report, propagate_adiabatic, propagate_fixed)
from .sysid import ResponseSet, effective_dimension, identify_responses
from .system import RateTable, SystemSpec, Transition, build_rate_table, v_system

PI = math.pi
CUTOFF = 80 * PI

# J_r geometry and identification settings used for the slope study
SLOPE_LOWER_OFFSET = 0.12
SLOPE_UPPER_OFFSET = 1.0
SLOPE_TAU = 0.1
SLOPE_DEPTH = 18
# bath discretization for the slope table is sized for this horizon, not the probe window
SLOPE_MODE_HORIZON = 7.0


class ConfigError(ValueError):
    """Invalid scenario name, parameter or value."""


@dataclass
class Setup:
    system: SystemSpec
    bath: Bath
    psi0: np.ndarray
    times: np.ndarray
    elements: list[tuple[int, int]]
    kinds: tuple[str, ...]
    adiabatic: bool = False
    oracle: bool = True
    n_modes: int | None = None

    @property
    def rho0(self) -> np.ndarray:
        return pure_state(self.psi0)

    @property
    def support(self) -> list[int]:
        return [i for i, a in enumerate(self.psi0) if abs(a) > 0]


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict
    factory: Callable[[dict], Setup] | None = field(default=None, repr=False)

    def params(self, overrides: dict | None = None) -> dict:
        out = dict(self.defaults)
        for key, raw in (overrides or {}).items():
            if key not in out:
                raise ConfigError(f"scenario {self.name!r} has no parameter {key!r}")
            out[key] = _coerce(raw, out[key], key)
        return out

    def setup(self, overrides: dict | None = None) -> Setup:
        if self.factory is None:
            raise ConfigError(f"scenario {self.name!r} is a sweep, not a single evolution")
        p = self.params(overrides)
        try:
            return self.factory(p)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{self.name}: {exc}") from exc


def _coerce(raw, default, key):
    if not isinstance(raw, str):
        return raw
    try:
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def _grid(p) -> np.ndarray:
    n = int(round(p["horizon"] / p["dt"]))
    if n < 1 or abs(n * p["dt"] - p["horizon"]) > 1e-9 * p["horizon"]:
        raise ConfigError("horizon must be a positive multiple of dt")
    return p["dt"] * np.arange(n + 1)


def _kinds(p) -> tuple[str, ...]:
    kinds = tuple(k.strip() for k in p["kinds"].split(",") if k.strip())
    for k in kinds:
        try:
            GeneratorKind(k)
        except ValueError as exc:
            raise ConfigError(f"unknown generator kind {k!r}") from exc
    return kinds


def _modes(p):
    return p["n_modes"] or None


COMMON = dict(cutoff=CUTOFF, horizon=30.0, dt=0.05, kinds="lindblad,redfield,nondegenerate",
              oracle=True, n_modes=0)


def _v_sid(p) -> Setup:
    w1, w2 = p["mean_freq"] - p["detuning"] / 2, p["mean_freq"] + p["detuning"] / 2
    sys = v_system(w1, w2, gamma1=p["gamma1"], gamma2=p["gamma2"])
    psi = np.array([0, 1, 1], dtype=complex) / math.sqrt(2)
    return Setup(sys, Ohmic(cutoff=p["cutoff"]), psi, _grid(p), [(1, 1), (2, 2), (1, 2)],
                 _kinds(p), oracle=p["oracle"], n_modes=_modes(p))


def _v_near_degenerate(p) -> Setup:
    w0 = p["w0"]
    sys = v_system(w0, w0 + p["detuning"], gamma1=p["gamma1"], gamma2=p["gamma2"], gamma_at=w0)
    psi = np.array([0, 1, 1], dtype=complex) / math.sqrt(2)
    return Setup(sys, Ohmic(cutoff=p["cutoff"]), psi, _grid(p), [(1, 1), (2, 2), (1, 2)],
                 _kinds(p), oracle=p["oracle"], n_modes=_modes(p))


def trident_system(w1: float = 10 * PI, gammas=(0.1, 0.075, 0.05)) -> SystemSpec:
    freqs = [w1] + [w1 + gammas[1] / (j - 1) for j in (2, 3)]
    trs = tuple(Transition(0, j + 1, gamma=g) for j, g in enumerate(gammas))
    return SystemSpec((0.0, *freqs), trs, labels=("0", "1", "2", "3"))


def _trident(p) -> Setup:
    sys = trident_system(p["w1"], (p["gamma1"], p["gamma2"], p["gamma3"]))
    psi = np.array([0, 7j, 3, 0]) / math.sqrt(58)
    return Setup(sys, Ohmic(cutoff=p["cutoff"]), psi, _grid(p), [(1, 1), (2, 2), (3, 3)],
                 _kinds(p), oracle=p["oracle"], n_modes=_modes(p))


def two_qubit_system(w1: float, w2: float, gamma1: float, gamma2: float) -> SystemSpec:
    """Basis index 2*q1 + q2; each qubit lowers independently."""
    trs = (Transition(0, 2, gamma=gamma1, gamma_at=w1), Transition(1, 3, gamma=gamma1, gamma_at=w1),
           Transition(0, 1, gamma=gamma2, gamma_at=w2), Transition(2, 3, gamma=gamma2, gamma_at=w2))
    return SystemSpec((0.0, w2, w1, w1 + w2), trs, labels=("00", "01", "10", "11"))


def _two_qubits(p) -> Setup:
    w1 = p["w1"]
    sys = two_qubit_system(w1, w1 + p["spacing"], p["gamma"], p["gamma"])
    psi = np.array([0, 1, 1j, 0]) / math.sqrt(2)
    return Setup(sys, Ohmic(cutoff=p["cutoff"]), psi, _grid(p), [(1, 1), (2, 2), (1, 2)],
                 _kinds(p), oracle=p["oracle"], n_modes=_modes(p))


def landau_zener_system(w2: float, delta0: float, nu: float, c: float,
                        gamma1: float, gamma2: float, gamma_at: float) -> SystemSpec:
    """Levels g1, g2, u1, u2; u1 sweeps past u2 and the two are coupled by c."""
    def energies(t):
        return (0.0, 0.0, w2 - delta0 * math.cos(nu * t), w2)

    h = np.zeros((4, 4), dtype=complex)
    h[2, 3] = h[3, 2] = c
    trs = (Transition(0, 2, gamma=gamma1, gamma_at=gamma_at),
           Transition(1, 3, gamma=gamma2, gamma_at=gamma_at))
    return SystemSpec(energies(0.0), trs, h_extra=h, energies_t=energies,
                      labels=("g1", "g2", "u1", "u2"))


def _landau_zener(p) -> Setup:
    nu = 2 * PI / p["period"]
    sys = landau_zener_system(p["w2"], p["delta0"], nu, p["c"], p["gamma1"], p["gamma2"], p["w2"])
    psi = np.array([0, 0, 1, 0], dtype=complex)
    return Setup(sys, Ohmic(cutoff=p["cutoff"]), psi, _grid(p), [(2, 2), (3, 3), (2, 3)],
                 _kinds(p), adiabatic=True, oracle=p["oracle"], n_modes=_modes(p))


def ramp_profile(horizon: float, rate: float) -> Callable[[float], float]:
    """Zero for the first quarter, then a linear rise."""
    return lambda t: 0.0 if t < horizon / 4 else rate * (t - horizon / 4)


def step_profile(horizon: float, height: float) -> Callable[[float], float]:
    """``height`` during the middle half, zero otherwise."""
    return lambda t: height if horizon / 4 < t < 3 * horizon / 4 else 0.0


def dark_state_system(w1: float, gamma: float, profile: Callable[[float], float]) -> SystemSpec:
    def energies(t):
        return (0.0, w1, w1 + profile(t))

    trs = (Transition(0, 1, gamma=gamma, gamma_at=w1), Transition(0, 2, gamma=gamma, gamma_at=w1))
    return SystemSpec(energies(0.0), trs, energies_t=energies, labels=("0", "1", "2"))


def _dark(shape):
    def build(p) -> Setup:
        if shape == "ramp":
            prof = ramp_profile(p["horizon"], p["ramp_rate"])
        else:
            prof = step_profile(p["horizon"], p["step_height"])
        sys = dark_state_system(p["w1"], p["gamma"], prof)
        psi = np.array([0, 1, -1], dtype=complex) / math.sqrt(2)
        return Setup(sys, Ohmic(cutoff=p["cutoff"]), psi, _grid(p), [(1, 1), (2, 2), (1, 2)],
                     _kinds(p), adiabatic=True, oracle=p["oracle"], n_modes=_modes(p))
    return build


def slope_bath(w0: float, log2_ratio: float, cutoff: float = CUTOFF,
               lower_offset: float = SLOPE_LOWER_OFFSET,
               upper_offset: float = SLOPE_UPPER_OFFSET) -> PiecewiseLinear:
    return PiecewiseLinear(cutoff=cutoff, ratio=2.0 ** log2_ratio,
                           lower=w0 - lower_offset, upper=w0 + upper_offset)


def slope_two_level(w0: float = 10 * PI, gamma: float = 0.296, cutoff: float = CUTOFF) -> SystemSpec:
    """Two-level system whose coupling gives ``gamma`` under the Ohmic spectrum."""
    g = coupling_for_rate(Ohmic(cutoff=cutoff), gamma, w0)
    return SystemSpec((0.0, w0), (Transition(0, 1, coupling=g),), labels=("g", "e"))


def slope_v(w0: float = 10 * PI, split: float = 0.1, gamma: float = 0.2, cutoff: float = CUTOFF) -> SystemSpec:
    oh = Ohmic(cutoff=cutoff)
    w1, w2 = w0 - split, w0 + split
    return v_system(w1, w2, couplings=(coupling_for_rate(oh, gamma, w1), coupling_for_rate(oh, gamma, w2)))


SLOPE_COMMON = dict(cutoff=CUTOFF, horizon=10.0, dt=0.05, log2_ratio=0.0,
                    lower_offset=SLOPE_LOWER_OFFSET, upper_offset=SLOPE_UPPER_OFFSET,
                    oracle=True, n_modes=0)


def _slope_two_level(p) -> Setup:
    sys = slope_two_level(p["w0"], p["gamma"], p["cutoff"])
    bath = slope_bath(p["w0"], p["log2_ratio"], p["cutoff"], p["lower_offset"], p["upper_offset"])
    return Setup(sys, bath, np.array([0, 1], dtype=complex), _grid(p), [(1, 1)], _kinds(p),
                 oracle=p["oracle"], n_modes=_modes(p))


def _slope_v(p) -> Setup:
    sys = slope_v(p["w0"], p["split"], p["gamma"], p["cutoff"])
    bath = slope_bath(p["w0"], p["log2_ratio"], p["cutoff"], p["lower_offset"], p["upper_offset"])
    return Setup(sys, bath, np.array([0, 0, 1], dtype=complex), _grid(p), [(1, 1), (2, 2), (1, 2)],
                 _kinds(p), oracle=p["oracle"], n_modes=_modes(p))


def builtin_scenarios() -> dict[str, Scenario]:
    items = [
        Scenario("v-sid", "V system at mean frequency 3pi, Ohmic bath; identification target",
                 {**COMMON, "mean_freq": 3 * PI, "detuning": 0.0, "gamma1": 0.1, "gamma2": 0.05},
                 _v_sid),
        Scenario("v-near-degenerate", "V system at 10pi, superposition of the upper levels",
                 {**COMMON, "w0": 10 * PI, "detuning": 0.4, "gamma1": 0.1, "gamma2": 0.05},
                 _v_near_degenerate),
        Scenario("trident", "three near-degenerate transitions sharing a ground state",
                 {**COMMON, "w1": 10 * PI, "gamma1": 0.1, "gamma2": 0.075, "gamma3": 0.05,
                  "kinds": "lindblad,redfield"}, _trident),
        Scenario("two-qubits", "two co-located qubits, single excitation shared",
                 {**COMMON, "w1": 10 * PI, "spacing": 0.2, "gamma": 0.1, "kinds": "lindblad,redfield"},
                 _two_qubits),
        Scenario("four-level-lz", "coupled upper levels swept through each other (adiabatic)",
                 {**COMMON, "horizon": 32.0, "w2": 2 * PI, "delta0": PI / 2, "period": 64.0, "c": 0.2,
                  "gamma1": 0.025, "gamma2": 0.05, "kinds": "lindblad"}, _landau_zener),
        Scenario("dark-ramp", "V-system dark state, detuning ramped after a delay (adiabatic)",
                 {**COMMON, "horizon": 8.0, "w1": 3 * PI, "gamma": 0.1, "ramp_rate": PI / 64,
                  "kinds": "lindblad"}, _dark("ramp")),
        Scenario("dark-step", "V-system dark state, detuning switched on and off (adiabatic)",
                 {**COMMON, "horizon": 8.0, "w1": 3 * PI, "gamma": 0.1, "step_height": PI / 2,
                  "kinds": "lindblad"}, _dark("step")),
        Scenario("slope-two-level", "two-level decay into the steep piecewise-linear spectrum",
                 {**SLOPE_COMMON, "w0": 10 * PI, "gamma": 0.296, "kinds": "lindblad"}, _slope_two_level),
        Scenario("slope-v", "V system decaying from |2> into the steep spectrum",
                 {**SLOPE_COMMON, "w0": 10 * PI, "split": 0.1, "gamma": 0.2, "kinds": "lindblad,redfield"},
                 _slope_v),
        Scenario("slope-table", "effective dimension versus spectral slope for both slope systems",
                 {"max_log2_ratio": 13, "tau": SLOPE_TAU, "depth": SLOPE_DEPTH,
                  "lower_offset": SLOPE_LOWER_OFFSET, "upper_offset": SLOPE_UPPER_OFFSET,
                  "cutoff": CUTOFF}),
    ]
    return {s.name: s for s in items}


def get_scenario(name: str) -> Scenario:
    reg = builtin_scenarios()
    if name not in reg:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(reg)}")
    return reg[name]


# ---------------------------------------------------------------- solving

def solve(setup: Setup, kind: str) -> EvolutionResult:
    if setup.adiabatic:
        return propagate_adiabatic(setup.system, setup.bath, setup.rho0, setup.times, kind)
    return propagate_fixed(build_generator(kind, setup.system, setup.bath), setup.rho0, setup.times)


def solve_with_rates(setup: Setup, kind: str, rates: RateTable) -> EvolutionResult:
    gen = build_generator(kind, setup.system, setup.bath, rates=rates)
    return propagate_fixed(gen, setup.rho0, setup.times)


def exact(setup: Setup) -> EvolutionResult:
    oracle = SingleExcitationOracle(setup.system, setup.bath, setup.times, setup.support,
                                    n_modes=setup.n_modes)
    return oracle.reduced(setup.rho0)


@dataclass
class ComparisonReport:
    scenario: str
    params: dict
    results: dict[str, EvolutionResult]
    errors: dict[tuple[str, str], ErrorSummary]
    positivity: dict[str, float]
    failed: str | None = None

    def summary(self) -> configparser.ConfigParser:
        cfg = configparser.ConfigParser()
        cfg["scenario"] = {"name": self.scenario, "status": "failed" if self.failed else "ok"}
        if self.failed:
            cfg["scenario"]["failure"] = self.failed
        cfg["params"] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in self.params.items()}
        cfg["errors"] = {}
        for (a, b), e in self.errors.items():
            cfg["errors"][f"{a}_vs_{b}_mean"] = repr(e.mean)
            cfg["errors"][f"{a}_vs_{b}_max"] = repr(e.max)
            cfg["errors"][f"{a}_vs_{b}_max_element"] = repr(e.max_element)
        cfg["positivity"] = {k: repr(v) for k, v in self.positivity.items()}
        return cfg


CSV_SCHEMA = """\
Trajectory CSV files (one per solver, named <solver>.csv)
  lines starting with '#' carry run metadata as 'key = value'
  time       simulation time (units of the reference frequency's inverse)
  re_ij      real part of density-matrix element (i, j), row-major over i then j
  im_ij      imaginary part of the same element
  min_eig    smallest eigenvalue of the Hermitian part of rho
  trace      real part of tr(rho)
Solver names: lindblad, redfield, degenerate, nondegenerate, secular, exact, trajectories
summary.ini: [params] echoes the inputs, [errors] holds <a>_vs_<b>_{mean,max,max_element}
  from the tracked-element error metric, [positivity] the most negative eigenvalue per solver.
"""


def write_schema(out_dir: Path) -> None:
    (out_dir / "schema.txt").write_text(CSV_SCHEMA)


def run_comparison(scenario: str | Scenario, overrides: dict | None = None,
                   out_dir: str | Path | None = None) -> ComparisonReport:
    """Run every requested solver (and the oracle) on a shared grid.

    If a solver fails, the outputs produced so far are written with the
    summary marked as failed and the exception is re-raised.
    """
    sc = get_scenario(scenario) if isinstance(scenario, str) else scenario
    params = sc.params(overrides)
    setup = sc.setup(overrides)
    report = ComparisonReport(sc.name, params, {}, {}, {})
    try:
        if setup.oracle:
            report.results["exact"] = exact(setup)
        for kind in setup.kinds:
            report.results[kind] = solve(setup, kind)
    except Exception as exc:
        report.failed = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        names = list(report.results)
        for a, b in itertools.combinations(names, 2):
            report.errors[(b, a) if a == "exact" else (a, b)] = error_metric(
                report.results[a], report.results[b], setup.elements)
        report.positivity = {k: positivity_report(r) for k, r in report.results.items()}
        if out_dir is not None:
            write_report(report, Path(out_dir))
    return report


def write_report(report: ComparisonReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {"scenario": report.scenario}
    for name, res in report.results.items():
        res.to_csv(out_dir / f"{name}.csv", {**meta, "solver": name})
    with open(out_dir / "summary.ini", "w") as fh:
        report.summary().write(fh)
    write_schema(out_dir)


# ---------------------------------------------------------------- fitting

class FitConvergenceError(NumericalError):
    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass
class FitResult:
    rates: RateTable
    error: float
    nominal_error: float
    sweeps: int


def fit_rates(setup: Setup, reference: EvolutionResult, kind: str = "lindblad", *,
              rates: RateTable | None = None, span: float = 4.0, max_sweeps: int = 100,
              rtol: float = 1e-6, atol: float = 1e-8, xatol: float = 1e-9) -> FitResult:
    """Tune every R_j and I_j to minimise the time-averaged error against ``reference``.

    Coordinate-wise bounded scalar minimisation; R_j searches
    [R_j/span, R_j*span] and I_j searches I_j +- span*max(|I_j|, R_j).
    Sweeps repeat until the error improves by less than ``rtol`` relative
    (or ``atol`` absolute, which matters when the data fit exactly).
    """
    if setup.adiabatic:
        raise ConfigError("rate fitting needs a time-independent scenario")
    base = rates if rates is not None else build_rate_table(setup.system, setup.bath)
    params = np.concatenate([base.decay, base.lamb]).astype(float)
    n = len(base)
    lo = np.concatenate([base.decay / span, base.lamb - span * np.maximum(np.abs(base.lamb), base.decay)])
    hi = np.concatenate([base.decay * span, base.lamb + span * np.maximum(np.abs(base.lamb), base.decay)])

    def objective(x):
        table = base.with_values(decay=x[:n], lamb=x[n:])
        return error_metric(solve_with_rates(setup, kind, table), reference, setup.elements).mean

    nominal = objective(params)
    best = nominal
    for sweep in range(1, max_sweeps + 1):
        start = best
        for i in range(2 * n):
            def f(v, i=i):
                x = params.copy()
                x[i] = v
                return objective(x)
            res = minimize_scalar(f, bounds=(lo[i], hi[i]), method="bounded",
                                  options={"xatol": xatol * max(1.0, abs(params[i]))})
            if res.fun < best:
                params[i], best = res.x, res.fun
        if start - best <= rtol * start + atol:
            return FitResult(base.with_values(decay=params[:n], lamb=params[n:]), best, nominal, sweep)
    result = FitResult(base.with_values(decay=params[:n], lamb=params[n:]), best, nominal, max_sweeps)
    raise FitConvergenceError(f"no convergence after {max_sweeps} sweeps", result)


# ---------------------------------------------------------------- identification

def observed_probes(levels: Sequence[int], dim: int) -> tuple[list[np.ndarray], Callable]:
    """Unit initial conditions and the coordinate read-out for a set of levels.

    Coordinates: populations of ``levels``, then Re and Im of each coherence
    between them (in index order).
    """
    levels = list(levels)
    probes, pairs = [], list(itertools.combinations(levels, 2))
    for a in levels:
        m = np.zeros((dim, dim), dtype=complex)
        m[a, a] = 1
        probes.append(m)
    for a, b in pairs:
        m = np.zeros((dim, dim), dtype=complex)
        m[a, b] = m[b, a] = 1
        probes.append(m)
        m = np.zeros((dim, dim), dtype=complex)
        m[a, b], m[b, a] = 1j, -1j
        probes.append(m)

    def read(states: np.ndarray) -> np.ndarray:
        cols = [states[:, a, a].real for a in levels]
        for a, b in pairs:
            cols += [states[:, a, b].real, states[:, a, b].imag]
        return np.stack(cols, axis=1)

    return probes, read


def oracle_responses(system: SystemSpec, bath: Bath, levels: Sequence[int], tau: float,
                     n_maps: int, n_modes: int | None = None) -> ResponseSet:
    times = tau * np.arange(n_maps)
    oracle = SingleExcitationOracle(system, bath, times, levels, n_modes=n_modes)
    probes, read = observed_probes(levels, system.dim)
    maps = np.stack([read(oracle.reduced(p).states) for p in probes], axis=2)
    return ResponseSet(tau, maps)


def generator_responses(generator: np.ndarray, levels: Sequence[int], tau: float,
                        n_maps: int) -> ResponseSet:
    d = int(round(math.sqrt(generator.shape[0])))
    times = tau * np.arange(n_maps)
    probes, read = observed_probes(levels, d)
    maps = np.stack([read(propagate_fixed(generator, p, times).states) for p in probes], axis=2)
    return ResponseSet(tau, maps)


def slope_dimension(system: SystemSpec, levels: Sequence[int], log2_ratio: float, *,
                    tau: float = SLOPE_TAU, depth: int = SLOPE_DEPTH,
                    lower_offset: float = SLOPE_LOWER_OFFSET, upper_offset: float = SLOPE_UPPER_OFFSET,
                    cutoff: float = CUTOFF) -> int:
    w0 = 0.5 * (min(system.bare_frequency(j) for j in range(len(system.transitions)))
                + max(system.bare_frequency(j) for j in range(len(system.transitions))))
    bath = slope_bath(w0, log2_ratio, cutoff, lower_offset, upper_offset)
    n_modes = default_mode_count(cutoff, max(SLOPE_MODE_HORIZON, tau * (2 * depth + 1)))
    resp = oracle_responses(system, bath, levels, tau, 2 * depth + 2, n_modes)
    return effective_dimension(identify_responses(resp, depth))


def slope_table(max_log2_ratio: int = 13, *, tau: float = SLOPE_TAU, depth: int = SLOPE_DEPTH,
                lower_offset: float = SLOPE_LOWER_OFFSET, upper_offset: float = SLOPE_UPPER_OFFSET,
                cutoff: float = CUTOFF) -> dict[str, list[int]]:
    """Effective dimensions of the two-level and V systems for r = 2^0 .. 2^max."""
    two, vee = slope_two_level(cutoff=cutoff), slope_v(cutoff=cutoff)
    kw = dict(tau=tau, depth=depth, lower_offset=lower_offset, upper_offset=upper_offset, cutoff=cutoff)
    exps = list(range(max_log2_ratio + 1))
    return {
        "log2_ratio": exps,
        "two_level": [slope_dimension(two, [1], e, **kw) for e in exps],
        "v_system": [slope_dimension(vee, [1, 2], e, **kw) for e in exps],
    }


def log_linear_deviation(times: np.ndarray, population: np.ndarray, floor: float = 1e-3) -> float:
    """Largest residual of a straight-line fit to log(population) where it exceeds ``floor``."""
    mask = population > floor
    if mask.sum() < 3:
        raise ValueError("too few samples above the floor")
    t, y = times[mask], np.log(population[mask])
    coef = np.polyfit(t, y, 1)
    return float(np.max(np.abs(y - np.polyval(coef, t))))



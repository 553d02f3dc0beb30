"""Bath spectral densities, decay rates, Lamb shifts and thermal occupation.

Every bath has a sharp cut-off: the spectral density is defined on
``[0, cutoff]`` and all frequency integrals stop there.  With a coupling
``g`` to a transition of frequency ``w``::

    decay rate     gamma = 2 pi |g|^2 J(w)
    Lamb shift     Delta = |g|^2 P int_0^cutoff J(x) / (x - w) dx
    thermal shift  Delta_T = |g|^2 P int_0^cutoff J(x) n_T(x) / (x - w) dx

The per-|g|^2 pieces ``pi J(w)`` and the two principal-value integrals are
exposed as :meth:`Bath.decay_integral`, :meth:`Bath.lamb_integral` and
:meth:`Bath.thermal_lamb_integral`.
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

EPSABS = 1e-12
EPSREL = 1e-9
QUAD_LIMIT = 400


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class Bath:
    cutoff: float
    temperature: float = 0.0

    def __post_init__(self):
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")

    # subclasses implement _density on validated arrays
    def _density(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def density(self, w):
        """Spectral density J(w); raises ValueError outside [0, cutoff]."""
        arr = np.asarray(w, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.cutoff):
            raise ValueError(f"frequency outside [0, {self.cutoff}]")
        out = self._density(arr)
        return float(out) if np.ndim(out) == 0 else out

    def breakpoints(self) -> tuple[float, ...]:
        """Interior points where J is not smooth (handed to the quadrature)."""
        return ()

    def with_temperature(self, temperature: float) -> "Bath":
        return replace(self, temperature=temperature)

    def _check_transition(self, w: float) -> None:
        if not 0 < w < self.cutoff:
            raise ValueError(f"transition frequency {w} outside (0, {self.cutoff})")

    def decay_integral(self, w: float) -> float:
        """pi J(w), the decay rate per |g|^2 divided by two."""
        self._check_transition(w)
        return math.pi * self.density(w)

    def lamb_integral(self, w: float) -> float:
        """P int_0^cutoff J(x)/(x - w) dx."""
        return self.lamb_integral_pv(w)

    def lamb_integral_pv(self, w: float) -> float:
        self._check_transition(w)
        return _cached_lamb_pv(self, float(w))

    def thermal_lamb_integral(self, w: float) -> float:
        """P int_0^cutoff J(x) n_T(x)/(x - w) dx; zero at T = 0."""
        self._check_transition(w)
        if self.temperature == 0:
            return 0.0
        return _cached_thermal_pv(self, float(w))


@dataclass(frozen=True)
class Ohmic(Bath):
    """J(w) = w / cutoff**2."""

    def _density(self, w):
        return w / self.cutoff**2

    def lamb_integral(self, w: float) -> float:
        self._check_transition(w)
        c = self.cutoff
        return (c + w * math.log((c - w) / w)) / c**2


@dataclass(frozen=True)
class PiecewiseLinear(Bath):
    """Ohmic slope outside [lower, upper], slope multiplied by ``ratio`` inside.

    The three segments join continuously, so for w above ``upper``
    ``J(w) = (lower + ratio*(upper - lower) + (w - upper)) / cutoff**2``.
    """

    ratio: float = 1.0
    lower: float = 0.0
    upper: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not 0 <= self.lower < self.upper < self.cutoff:
            raise ValueError("need 0 <= lower < upper < cutoff")
        if self.ratio < 0:
            raise ValueError("ratio must be nonnegative")

    @classmethod
    def around(cls, center: float, ratio: float, cutoff: float,
               half_width: float = 2 * math.pi, temperature: float = 0.0):
        return cls(cutoff=cutoff, temperature=temperature, ratio=ratio,
                   lower=center - half_width, upper=center + half_width)

    def _density(self, w):
        lo, hi, r = self.lower, self.upper, self.ratio
        mid = lo + r * (np.clip(w, lo, hi) - lo)
        return (mid + np.minimum(w, lo) - lo + np.maximum(w, hi) - hi) / self.cutoff**2

    def breakpoints(self):
        return (self.lower, self.upper)


@dataclass(frozen=True)
class Flat(Bath):
    """J(w) = level on [0, cutoff].

    With ``shift`` set, the bath is treated as white noise whose complex
    rate is frequency independent: the Lamb integral is the constant
    ``shift`` and the thermal Lamb integral vanishes.  Without it, the Lamb
    integral is the finite-band value ``level * ln((cutoff - w)/w)``.
    """

    level: float = 0.0
    shift: float | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.level < 0:
            raise ValueError("level must be nonnegative")

    def _density(self, w):
        return np.full_like(np.asarray(w, dtype=float), self.level)

    def lamb_integral(self, w: float) -> float:
        if self.shift is not None:
            self._check_transition(w)
            return float(self.shift)
        return super().lamb_integral(w)

    def thermal_lamb_integral(self, w: float) -> float:
        if self.shift is not None:
            self._check_transition(w)
            return 0.0
        return super().thermal_lamb_integral(w)


@dataclass(frozen=True)
class Tabulated(Bath):
    """Linear interpolation of (frequency, density) samples.

    The table must start at 0 and end at or beyond ``cutoff``.
    """

    grid: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise ValueError("grid and values must be 1-d of equal length >= 2")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if g[0] > 0 or g[-1] < self.cutoff:
            raise ValueError("table must cover [0, cutoff]")
        if np.any(v < 0):
            raise ValueError("spectral density must be nonnegative")

    def _density(self, w):
        return np.interp(w, self.grid, self.values)

    def breakpoints(self):
        return tuple(x for x in self.grid if 0 < x < self.cutoff)


def load_tabulated(path: str | Path, cutoff: float | None = None,
                   temperature: float = 0.0) -> Tabulated:
    """Read a two-column CSV (frequency, density); a non-numeric header row is skipped."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                if rows:
                    raise
    if not rows:
        raise ValueError(f"no data rows in {path}")
    grid, values = zip(*rows)
    return Tabulated(cutoff=cutoff if cutoff is not None else grid[-1],
                     temperature=temperature, grid=tuple(grid), values=tuple(values))


def principal_value(f: Callable, lo: float, hi: float, x_sing: float, *,
                    residue: float | None = None, points: Sequence[float] = (),
                    epsabs: float = EPSABS, epsrel: float = EPSREL) -> float:
    """Cauchy principal value of int_lo^hi f(x) dx with a simple pole at x_sing.

    The pole part ``c/(x - x_sing)`` is subtracted, the smooth remainder is
    integrated adaptively on each side of the pole, and the pole part is
    added back analytically as ``c ln((hi - x_sing)/(x_sing - lo))``.  If
    ``residue`` is not given, ``c = lim (x - x_sing) f(x)`` is estimated by
    Richardson-extrapolated symmetric sampling.
    """
    if not lo < x_sing < hi:
        raise ValueError("singular point must lie strictly inside (lo, hi)")
    if residue is None:
        residue = _estimate_residue(f, x_sing, 1e-3 * min(x_sing - lo, hi - x_sing))
    c = float(residue)

    def regular(x):
        return f(x) - c / (x - x_sing)

    total = c * math.log((hi - x_sing) / (x_sing - lo))
    for a, b in ((lo, x_sing), (x_sing, hi)):
        inner = sorted(p for p in points if a < p < b)
        total += _quad(regular, a, b, inner, epsabs, epsrel)
    return total


def _estimate_residue(f, x0, h):
    def sym(step):
        return 0.5 * step * (f(x0 + step) - f(x0 - step))

    return (4 * sym(h / 2) - sym(h)) / 3


def _quad(func, a, b, points, epsabs, epsrel):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(func, a, b, points=points or None,
                                      epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    if not math.isfinite(val):
        raise QuadratureError("non-finite quadrature result")
    return val


def thermal_occupation(w, temperature: float):
    """Bose-Einstein occupation 1/(exp(w/T) - 1); exactly zero at T = 0."""
    arr = np.asarray(w, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("frequency must be positive")
    if temperature < 0:
        raise ValueError("temperature must be nonnegative")
    if temperature == 0:
        out = np.zeros_like(arr)
    else:
        with np.errstate(over="ignore", divide="ignore"):
            out = 1.0 / np.expm1(arr / temperature)
        if not np.all(np.isfinite(out)):
            raise OverflowError("thermal occupation overflowed (w/T too small)")
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=4096)
def _cached_lamb_pv(bath: Bath, w: float) -> float:
    return principal_value(
        lambda x: bath._density(x) / (x - w), 0.0, bath.cutoff, w,
        residue=float(bath._density(np.asarray(w))), points=bath.breakpoints(),
    )


@functools.lru_cache(maxsize=4096)
def _cached_thermal_pv(bath: Bath, w: float) -> float:
    temp = bath.temperature

    def numer(x):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return bath._density(x) / np.expm1(x / temp)

    return principal_value(
        lambda x: numer(x) / (x - w), 0.0, bath.cutoff, w,
        residue=float(numer(np.asarray(w))), points=bath.breakpoints(),
    )


def spectral_density(bath: Bath, w):
    return bath.density(w)


def decay_rate(bath: Bath, g: float, w0: float) -> float:
    """gamma = 2 pi |g|^2 J(w0)."""
    return 2.0 * abs(g) ** 2 * bath.decay_integral(w0)


def coupling_for_rate(bath: Bath, gamma: float, w0: float) -> float:
    """Coupling magnitude |g| that gives decay rate ``gamma`` at ``w0``."""
    if gamma < 0:
        raise ValueError("decay rate must be nonnegative")
    rate = bath.decay_integral(w0)
    if rate == 0:
        if gamma == 0:
            return 0.0
        raise ValueError(f"spectral density vanishes at {w0}")
    return math.sqrt(gamma / (2.0 * rate))


def lamb_shift_ohmic_closed(gamma: float, w0: float, cutoff: float) -> float:
    """(gamma/2pi) [cutoff/w0 + ln(cutoff/w0 - 1)] for the sharp-cutoff Ohmic bath."""
    if not (w0 > 0 and cutoff > w0):
        raise ValueError("need cutoff > w0 > 0")
    x = cutoff / w0
    return gamma / (2 * math.pi) * (x + math.log(x - 1))


def lamb_shift_pv(bath: Bath, g: float, w0: float) -> float:
    """Lamb shift by numerical principal value, whatever the bath type."""
    if isinstance(bath, Flat) and bath.shift is not None:
        return abs(g) ** 2 * bath.lamb_integral(w0)
    return abs(g) ** 2 * bath.lamb_integral_pv(w0)


def thermal_lamb_shift(bath: Bath, g: float, w0: float,
                       temperature: float | None = None) -> float:
    if temperature is not None:
        bath = bath.with_temperature(temperature)
    return abs(g) ** 2 * bath.thermal_lamb_integral(w0)

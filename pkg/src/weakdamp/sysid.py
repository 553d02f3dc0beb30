"""Subspace identification of a linear system from its free responses.

Given maps Y_k = P Z^k P^T (the observed coordinates at time k*tau in
response to unit initial conditions on those coordinates), two block Hankel
matrices are formed; the rank of the first gives the dimension of the
smallest linear model reproducing the data, and the pair gives its one-step
map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import logm

PINV_RTOL = 1e-10
DEFAULT_DEPTH = 8
DEFAULT_TAU = 0.5
DEFAULT_MASS = 0.999
DEFAULT_RESIDUAL = 3e-4


class BranchError(ValueError):
    """The matrix logarithm is ambiguous (eigenvalue on or beyond the branch cut)."""


@dataclass
class ResponseSet:
    tau: float
    maps: np.ndarray  # (K, N_obs, N_obs), maps[k] = Y_k

    def __post_init__(self):
        self.maps = np.asarray(self.maps, dtype=float)
        if self.maps.ndim != 3 or self.maps.shape[1] != self.maps.shape[2]:
            raise ValueError("maps must have shape (K, N, N)")
        if not np.all(np.isfinite(self.maps)):
            raise ValueError("non-finite responses")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def n_obs(self) -> int:
        return self.maps.shape[1]

    def save(self, path: str | Path) -> None:
        """CSV blocks: a header line per map, then its rows."""
        with open(path, "w") as fh:
            fh.write(f"# tau = {self.tau!r}\n# n_obs = {self.n_obs}\n# n_maps = {len(self.maps)}\n")
            for k, y in enumerate(self.maps):
                fh.write(f"# Y_{k}\n")
                for row in y:
                    fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ResponseSet":
        meta, rows = {}, []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("#"):
                    if "=" in line:
                        key, val = line[1:].split("=", 1)
                        meta[key.strip()] = val.strip()
                elif line:
                    rows.append([float(v) for v in line.split(",")])
        n, k = int(meta["n_obs"]), int(meta["n_maps"])
        return cls(float(meta["tau"]), np.array(rows).reshape(k, n, n))


def probe_responses(evolver: Callable[[np.ndarray, np.ndarray], np.ndarray], n_obs: int,
                    tau: float, n_maps: int) -> ResponseSet:
    """Collect Y_0 .. Y_{n_maps-1} from a linear black-box evolver.

    ``evolver(x0, times)`` returns an array of shape (len(times), n_obs) with
    the observed coordinates along the evolution from observed initial
    condition ``x0``; hidden variables start from the evolver's fixed
    reference.
    """
    times = tau * np.arange(n_maps)
    maps = np.empty((n_maps, n_obs, n_obs))
    for j in range(n_obs):
        x0 = np.zeros(n_obs)
        x0[j] = 1.0
        resp = np.asarray(evolver(x0, times), dtype=float)
        if resp.shape != (n_maps, n_obs):
            raise ValueError(f"evolver returned shape {resp.shape}, expected {(n_maps, n_obs)}")
        maps[:, :, j] = resp
    return ResponseSet(tau, maps)


def build_hankel(responses: ResponseSet, depth: int = DEFAULT_DEPTH) -> tuple[np.ndarray, np.ndarray]:
    """Block Hankel pair: block (i, j) of H0 is Y_{i+j}, of H1 is Y_{i+j+1}."""
    y = responses.maps
    if len(y) < 2 * depth + 2:
        raise ValueError(f"depth {depth} needs {2 * depth + 2} maps, have {len(y)}")
    h0 = np.block([[y[i + j] for j in range(depth + 1)] for i in range(depth + 1)])
    h1 = np.block([[y[i + j + 1] for j in range(depth + 1)] for i in range(depth + 1)])
    return h0, h1


@dataclass
class SIDModel:
    h0: np.ndarray
    h1: np.ndarray
    tau: float
    singular_values: np.ndarray
    order: int
    reduced_map: np.ndarray
    _u: np.ndarray = field(repr=False, default=None)
    _v: np.ndarray = field(repr=False, default=None)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the reduced map, largest magnitude first."""
        ev = np.linalg.eigvals(self.reduced_map)
        return ev[np.argsort(-np.abs(ev), kind="stable")]

    def truncated(self, order: int) -> "SIDModel":
        return identify(self.h0, self.h1, self.tau, order)

    def generator(self) -> np.ndarray:
        return extract_generator(self.reduced_map, self.tau)

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# tau = {self.tau!r}\n# order = {self.order}\n")
            fh.write("# singular_values\n")
            fh.write(",".join(repr(float(s)) for s in self.singular_values) + "\n")
            fh.write("# reduced_map\n")
            for row in self.reduced_map:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def numerical_rank(singular_values: np.ndarray, rtol: float = PINV_RTOL) -> int:
    s = np.asarray(singular_values)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def identify(h0: np.ndarray, h1: np.ndarray, tau: float, order: int | None = None) -> SIDModel:
    """Reduced one-step map from the Hankel pair.

    With ``order`` None the model keeps every singular value above the
    relative cut-off PINV_RTOL.
    """
    u, s, vt = np.linalg.svd(h0)
    rank = numerical_rank(s)
    if rank < 1:
        raise ValueError("Hankel matrix is numerically zero")
    order = rank if order is None else int(order)
    if not 1 <= order <= rank:
        raise ValueError(f"order must lie in [1, {rank}]")
    uk, vk, root = u[:, :order], vt[:order].T, np.sqrt(s[:order])
    # pinv(U sqrt S) = S^{-1/2} U^T for orthonormal U
    m = (uk.T @ h1 @ vk) / root[:, None] / root[None, :]
    return SIDModel(h0, h1, tau, s, order, m, uk, vk)


def effective_dimension(model: SIDModel, criterion: str = "mass",
                        fraction: float = DEFAULT_MASS, residual: float = DEFAULT_RESIDUAL) -> int:
    """Number of dynamical variables needed to describe the data.

    ``"mass"``: smallest k whose leading k singular values of H0 carry
    ``fraction`` of their total.  ``"residual"``: smallest k whose discarded
    eigenvalue magnitudes of the full-order map are below ``residual`` of
    the map's eigenvalue 1-norm.
    """
    if criterion == "mass":
        s = model.singular_values
        cum = np.cumsum(s) / s.sum()
        return int(np.searchsorted(cum, fraction - 1e-15) + 1)
    if criterion == "residual":
        mags = np.abs(model.eigenvalues)
        tail = 1.0 - np.cumsum(mags) / mags.sum()
        return int(np.argmax(tail < residual) + 1)
    raise ValueError(f"unknown criterion {criterion!r}")


def extract_generator(reduced_map: np.ndarray, tau: float) -> np.ndarray:
    """Principal logarithm divided by tau; refuses ambiguous branches."""
    m = np.atleast_2d(np.asarray(reduced_map))
    ev = np.linalg.eigvals(m)
    if np.any(np.abs(ev) == 0):
        raise BranchError("map is singular")
    bad = (np.abs(ev.imag) <= 1e-12 * np.abs(ev)) & (ev.real < 0)
    if np.any(bad):
        raise BranchError("eigenvalue on the negative real axis; logarithm branch is ambiguous")
    if np.any(np.abs(np.angle(ev)) >= math.pi - 1e-12):
        raise BranchError("eigenvalue phase at the branch cut; reduce tau")
    gen = logm(m) / tau
    if np.isrealobj(m) and np.max(np.abs(gen.imag), initial=0.0) < 1e-9 * max(1.0, np.abs(gen).max()):
        gen = gen.real
    return gen


def identify_responses(responses: ResponseSet, depth: int = DEFAULT_DEPTH,
                       order: int | None = None) -> SIDModel:
    h0, h1 = build_hankel(responses, depth)
    return identify(h0, h1, responses.tau, order)

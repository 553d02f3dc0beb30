"""Dense operator and superoperator helpers.

Density matrices are vectorized by column stacking, so that for any
operators ``A`` and ``B``::

    vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)

All generators in this package act on vectors produced by :func:`vectorize`.
Units: hbar = 1, so Hamiltonians are angular frequencies.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a square matrix into a vector of length d**2."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1, order="F")


def unvectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    vec = np.asarray(vec)
    d = int(round(np.sqrt(vec.shape[-1])))
    if d * d != vec.shape[-1]:
        raise ValueError(f"length {vec.shape[-1]} is not a perfect square")
    return vec.reshape(d, d, order="F")


def _square(op: np.ndarray, name: str = "operator") -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"{name} must be square, got shape {op.shape}")
    return op


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    op = np.asarray(op)
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol)


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho."""
    a = _square(a)
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho @ b."""
    b = _square(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho @ b."""
    return np.kron(_square(b).T, _square(a))


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> -i [h, rho].

    Raises ValueError if ``h`` is not Hermitian to 1e-12.
    """
    h = _square(h, "Hamiltonian")
    if not is_hermitian(h):
        raise ValueError("Hamiltonian is not Hermitian")
    return -1j * (spre(h) - spost(h))


def dissipator_superop(c: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Superoperator of rho -> c rho c^dag - (c^dag c rho + rho c^dag c)/2."""
    c = _square(c, "jump operator")
    if dim is not None and c.shape[0] != dim:
        raise ValueError(f"jump operator has dimension {c.shape[0]}, expected {dim}")
    cdc = c.conj().T @ c
    return sprepost(c, c.conj().T) - 0.5 * spre(cdc) - 0.5 * spost(cdc)


def apply_superop(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return unvectorize(superop @ vectorize(rho))


def trace_row(dim: int) -> np.ndarray:
    """Row vector t with t @ vec(rho) == tr(rho)."""
    return vectorize(np.eye(dim)).conj()


def ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(dim: int, index: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1.0
    return p


def transition_op(dim: int, lower: int, upper: int) -> np.ndarray:
    """|lower><upper|."""
    s = np.zeros((dim, dim), dtype=complex)
    s[lower, upper] = 1.0
    return s


def pure_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def choi_matrix(superop: np.ndarray) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) S(|i><j|) of a superoperator."""
    d = int(round(np.sqrt(superop.shape[0])))
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            choi += np.kron(e, apply_superop(superop, e))
    return choi


def lindblad_form_margin(generator: np.ndarray) -> float:
    """Smallest eigenvalue of the generator's Choi matrix projected off the
    maximally entangled vector.

    A trace-preserving generator has Lindblad (GKSL) form exactly when this is
    nonnegative (conditional complete positivity).
    """
    d = int(round(np.sqrt(generator.shape[0])))
    choi = choi_matrix(generator)
    omega = vectorize(np.eye(d)) / np.sqrt(d)
    # Choi index is |i>|j>, i.e. row-major vec of |i><j|; identity is symmetric
    proj = np.eye(d * d) - np.outer(omega, omega.conj())
    block = proj @ choi @ proj
    block = 0.5 * (block + block.conj().T)
    return float(np.linalg.eigvalsh(block).min())

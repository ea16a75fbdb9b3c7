"""Dense complex linear algebra used throughout the package.

States are plain ``numpy`` arrays: density matrices are square complex arrays,
pure states are 1-D unit vectors. All entropies are in bits.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

HERM_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
ZERO_EIG = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a structural precondition."""


class ResourceError(RuntimeError):
    """Raised when a computation would exceed a dimension guard."""


def _square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    return m


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(
        np.max(np.abs(m - m.conj().T), initial=0.0) <= tol
    )


def check_density(rho, name: str = "rho") -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Hermiticity is checked entrywise to 1e-12, positivity to -1e-10 on the
    smallest eigenvalue and the trace to 1e-10.
    """
    rho = _square(np.asarray(rho, dtype=complex), name)
    dev = np.max(np.abs(rho - rho.conj().T), initial=0.0)
    if dev > HERM_TOL:
        raise ValidationError(f"{name} is not Hermitian (deviation {dev:.3g})")
    lo = np.linalg.eigvalsh(rho)[0] if rho.size else 0.0
    if lo < -PSD_TOL:
        raise ValidationError(f"{name} is not positive semidefinite (min eigenvalue {lo:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"{name} does not have unit trace (trace {tr:.12g})")
    return rho


def check_pure(psi, name: str = "psi") -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValidationError(f"{name} must be a vector, got shape {psi.shape}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-12:
        raise ValidationError(f"{name} is not normalised (norm {nrm:.15g})")
    return psi


def hermitian_eig(h: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, u)`` with ``h == u @ diag(w) @ u.conj().T``.
    """
    h = _square(np.asarray(h, dtype=complex))
    dev = np.max(np.abs(h - h.conj().T), initial=0.0)
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3g})")
    w, u = np.linalg.eigh((h + h.conj().T) / 2)
    return w[::-1].copy(), u[:, ::-1].copy()


def _clamped_spectrum(rho: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.size and w[0] < -PSD_TOL:
        raise ValidationError(f"negative eigenvalue {w[0]:.3g} in entropy argument")
    return np.clip(w, 0.0, None)


def entropy_of_spectrum(w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > ZERO_EIG]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho, validate: bool = True) -> float:
    """Von Neumann entropy in bits, with 0 log 0 = 0."""
    rho = check_density(rho) if validate else np.asarray(rho, dtype=complex)
    return entropy_of_spectrum(_clamped_spectrum(rho))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def tensor(*mats) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    out = np.ones((1, 1), dtype=complex) if np.ndim(mats[0]) == 2 else np.ones(1, dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m))
    return out


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    ``dims`` are the local dimensions of the tensor factors. The kept factors
    appear in increasing index order. Keeping nothing returns a 1x1 matrix
    holding the trace.
    """
    rho = _square(np.asarray(rho, dtype=complex))
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValidationError(f"dims {dims} do not match matrix of size {rho.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = rho.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # einsum subscripts: row index i, column index n+i; traced factors share a letter
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    for i in traced:
        letters[n + i] = letters[i]
    out_sub = [letters[i] for i in keep] + [letters[n + i] for i in keep]
    sub = "".join(letters) + "->" + "".join(out_sub)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum(sub, t).reshape(kd, kd)


def permute_factors(rho: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator: new factor j is old factor ``order[j]``."""
    dims = [int(d) for d in dims]
    n = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    t = t.transpose(list(order) + [n + o for o in order])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def permute_vector(psi: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    dims = [int(d) for d in dims]
    return np.asarray(psi).reshape(dims).transpose(list(order)).reshape(-1)


def purify(rho) -> np.ndarray:
    """Canonical purification ``sum_i sqrt(a_i) g_i (x) g_i`` in the eigenbasis of rho."""
    rho = check_density(rho)
    w, u = hermitian_eig(rho)
    w = np.clip(w, 0.0, None)
    psi = np.einsum("i,ai,bi->ab", np.sqrt(w), u, u).reshape(-1)
    return psi / np.linalg.norm(psi)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def trace_norm(m) -> float:
    """Sum of singular values; uses the eigenvalue path for Hermitian input."""
    m = _square(np.asarray(m, dtype=complex))
    if is_hermitian(m, 1e-12):
        return float(np.sum(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def hermitian_log2(m: np.ndarray, floor: float = ZERO_EIG) -> np.ndarray:
    """Base-2 logarithm on the support of a PSD matrix; zero on its kernel."""
    w, u = np.linalg.eigh((m + m.conj().T) / 2)
    lw = np.where(w > floor, np.log2(np.where(w > floor, w, 1.0)), 0.0)
    return (u * lw) @ u.conj().T


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh((m + m.conj().T) / 2)
    return (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T


def pinv_sqrt_psd(m: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    w, u = np.linalg.eigh((m + m.conj().T) / 2)
    inv = np.where(w > floor, 1.0 / np.sqrt(np.where(w > floor, w, 1.0)), 0.0)
    return (u * inv) @ u.conj().T


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def maximally_entangled(d: int) -> np.ndarray:
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1.0
    return psi / np.sqrt(d)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random state from the induced (Hilbert-Schmidt for full rank) measure."""
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def weyl_operators(d: int) -> list[np.ndarray]:
    """The d^2 shift-clock unitaries ``X^a Z^b``, ordered by ``a*d + b``.

    They are pairwise orthogonal in Hilbert-Schmidt inner product with
    ``tr(W^dag W) = d``; index 0 is the identity.
    """
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    out = []
    for a in range(d):
        xa = np.linalg.matrix_power(shift, a)
        for b in range(d):
            out.append(xa @ np.linalg.matrix_power(clock, b))
    return out

"""Tolerance-aware linear algebra on density operators and POVMs.

Matrices are plain complex numpy arrays. The `as_*` validators check the
type invariants and return a read-only copy, so validated values can be
shared freely. All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    InvariantViolation,
    NonHermitian,
    NumericalFailure,
)


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-9
    psd: float = 1e-9
    trace: float = 1e-9
    povm: float = 1e-9
    prob: float = 1e-9
    eig: float = 1e-9


DEFAULT_TOL = Tolerances()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise InvariantViolation("shape", f"expected a 2-d array, got ndim={a.ndim}")
    if a.size == 0:
        raise InvariantViolation("shape", "empty matrix")
    if not np.all(np.isfinite(a)):
        raise InvariantViolation("finite", "matrix has NaN or Inf entries")
    return a


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def _require_hermitian(m: np.ndarray, tol: float) -> None:
    if m.shape[0] != m.shape[1]:
        raise NonHermitian(f"matrix is not square: {m.shape}")
    err = hermiticity_error(m)
    if err > tol:
        raise NonHermitian(f"max |A - A^dagger| = {err:.3e} exceeds {tol:.1e}")


def as_density(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Validate a density operator: Hermitian, PSD and unit trace."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvariantViolation("square", f"shape {a.shape}")
    if hermiticity_error(a) > tol.hermitian:
        raise InvariantViolation("hermitian", f"deviation {hermiticity_error(a):.3e}")
    a = 0.5 * (a + a.conj().T)
    tr = float(np.trace(a).real)
    if abs(tr - 1.0) > tol.trace:
        raise InvariantViolation("trace", f"trace {tr!r}")
    lo = float(np.linalg.eigvalsh(a)[0])
    if lo < -tol.psd:
        raise InvariantViolation("psd", f"min eigenvalue {lo:.3e}")
    return _frozen(a)


def as_povm_element(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvariantViolation("square", f"shape {a.shape}")
    if hermiticity_error(a) > tol.hermitian:
        raise InvariantViolation("hermitian", f"deviation {hermiticity_error(a):.3e}")
    a = 0.5 * (a + a.conj().T)
    w = np.linalg.eigvalsh(a)
    if w[0] < -tol.psd or w[-1] > 1 + tol.psd:
        raise InvariantViolation("povm-element", f"spectrum in [{w[0]:.3e}, {w[-1]:.3e}]")
    return _frozen(a)


def as_povm(elements, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, ...]:
    elems = tuple(as_povm_element(e, tol) for e in elements)
    if not elems:
        raise InvariantViolation("povm", "no elements")
    dim = elems[0].shape[0]
    if any(e.shape != (dim, dim) for e in elems):
        raise InvariantViolation("povm", "elements have different dimensions")
    dev = float(np.max(np.abs(sum(elems) - np.eye(dim))))
    if dev > tol.povm:
        raise InvariantViolation("completeness", f"max |sum E - I| = {dev:.3e}")
    return elems


def as_distribution(weights, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InvariantViolation("distribution", "weights must be a non-empty vector")
    if not np.all(np.isfinite(w)):
        raise InvariantViolation("finite", "non-finite weight")
    if np.any(w < -tol.prob):
        raise InvariantViolation("nonnegative", f"min weight {w.min():.3e}")
    s = float(w.sum())
    if abs(s - 1.0) > tol.prob:
        raise InvariantViolation("normalization", f"weights sum to {s!r}")
    return _frozen(np.clip(w, 0.0, None))


def hermitian_eigensystem(m, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching orthonormal eigenvectors (columns)."""
    a = as_matrix(m)
    _require_hermitian(a, tol.hermitian)
    a = 0.5 * (a + a.conj().T)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition did not converge: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def _spectrum(rho) -> np.ndarray:
    a = np.asarray(rho, dtype=complex)
    try:
        return np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc


def entropy_of_spectrum(w: np.ndarray) -> float:
    w = np.clip(np.asarray(w, dtype=float), 0.0, 1.0)
    w = w[w > 0]
    return float(-(w * np.log2(w)).sum())


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues are clipped to [0, 1] first."""
    return max(0.0, entropy_of_spectrum(_spectrum(rho)))


def trace_norm(m) -> float:
    return float(np.abs(_spectrum(m)).sum())


def _same_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")


def difference_norm(a, b) -> float:
    """||a - b||_1, computed identically for (a, b) and (b, a)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _same_dims(a, b)
    # fixed operand order makes the result exactly symmetric in floating point
    if a.tobytes() > b.tobytes():
        a, b = b, a
    return trace_norm(a - b)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of the difference."""
    return min(1.0, 0.5 * difference_norm(rho, sigma))


def psd_sqrt(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    try:
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Root fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho))."""
    a = np.asarray(rho, dtype=complex)
    b = np.asarray(sigma, dtype=complex)
    _same_dims(a, b)
    s = psd_sqrt(a)
    inner = _spectrum(s @ b @ s)
    f = float(np.sqrt(np.clip(inner, 0.0, None)).sum())
    return min(1.0, max(0.0, f))


def binary_entropy(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy argument {p!r} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def tensor_product(*mats) -> np.ndarray:
    if not mats:
        raise ValueError("tensor_product needs at least one factor")
    return reduce(np.kron, (np.asarray(m) for m in mats))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed random state (full rank unless `rank` given)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def is_diagonal(m, atol: float = 0.0) -> bool:
    a = np.asarray(m)
    off = a - np.diag(np.diagonal(a))
    return bool(np.all(np.abs(off) <= atol))

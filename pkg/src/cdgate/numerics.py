"""Dense complex linear algebra sized for 2^N x 2^N problems (N <= 6).

States are 1-D ``complex128`` arrays, operators square 2-D ``complex128``
arrays; elementary operations are thin, shape-checked wrappers over numpy.
The Hermitian eigensolver is a cyclic complex Jacobi iteration (see
``_kernels.jacobi_eigh``) so the package carries its own numeric oracle for
the closed-form spectra instead of leaning on LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, NoConvergenceError, NotHermitianError


@dataclass(frozen=True)
class Tolerances:
    """Central numeric tolerances used across the package."""

    hermiticity: float = 1e-10        # relative ||H - H^dag|| precondition
    eig_residual: float = 1e-12       # ||H v - w v|| <= tol * ||H||
    eig_orthonormality: float = 1e-12
    unitarity: float = 1e-8
    norm_drift: float = 1e-8          # | ||psi||^2 - 1 | monitor limit
    trace_drift: float = 1e-8
    positivity_floor: float = 1e-6    # eigenvalues >= -floor for valid rho
    gap_collision: float = 1e-8       # relative near-degeneracy cutoff in CD
    cd_element: float = 1e-10         # coupling below this decouples a crossing
    normalization: float = 1e-10      # | ||psi|| - 1 | preconditions


TOL = Tolerances()

_JACOBI_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_operator(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    return m


def as_state(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D state vector, got shape {v.shape}")
    return v


def kron(a, b) -> np.ndarray:
    """Kronecker product; the first factor is the leftmost qubit."""
    return np.kron(as_operator(a), as_operator(b))


def dagger(m) -> np.ndarray:
    return as_operator(m).conj().T


def matmul(a, b) -> np.ndarray:
    a, b = as_operator(a), as_operator(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def matrix_apply(m, v) -> np.ndarray:
    m, v = as_operator(m), as_state(v)
    if m.shape[1] != v.shape[0]:
        raise DimensionMismatchError(f"cannot apply {m.shape} to {v.shape}")
    return m @ v


def commutator(a, b) -> np.ndarray:
    a, b = as_operator(a), as_operator(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"commutator needs equal shapes, got {a.shape}, {b.shape}")
    return a @ b - b @ a


def trace(m) -> complex:
    return complex(np.trace(as_operator(m)))


def frobenius_distance(u, v) -> float:
    u, v = as_operator(u), as_operator(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"distance needs equal shapes, got {u.shape}, {v.shape}")
    return float(np.linalg.norm(u - v))


def phase_insensitive_distance(u, v) -> float:
    """min over a global phase of ||U - e^{i phi} V||_F."""
    u, v = as_operator(u), as_operator(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"distance needs equal shapes, got {u.shape}, {v.shape}")
    nu2 = np.linalg.norm(u) ** 2
    nv2 = np.linalg.norm(v) ** 2
    overlap = abs(np.trace(u.conj().T @ v))
    return float(np.sqrt(max(nu2 + nv2 - 2.0 * overlap, 0.0)))


def hermiticity_defect(m) -> float:
    """||H - H^dag||_inf relative to ||H||_inf (0 for the zero matrix)."""
    m = as_operator(m)
    scale = np.abs(m).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(m - m.conj().T).max() / scale)


def is_hermitian(m, tol: float = TOL.hermiticity) -> bool:
    return hermiticity_defect(m) <= tol


def hermitian_eig(h) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix with the cyclic Jacobi kernel.

    Eigenvalues come back ascending; each eigenvector's largest-magnitude
    component is made real and positive so comparisons are deterministic.
    """
    h = as_operator(h)
    defect = hermiticity_defect(h)
    if defect > TOL.hermiticity:
        raise NotHermitianError(
            f"matrix is not Hermitian (relative defect {defect:.3e})"
        )
    w, v, off, converged = _kernels.jacobi_eigh(h, _JACOBI_TOL, _JACOBI_MAX_SWEEPS)
    if not converged:
        raise NoConvergenceError(
            f"Jacobi sweeps exhausted (off-diagonal residual {off:.3e})", float(off)
        )
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for k in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, k])))
        pivot = v[i, k]
        if abs(pivot) > 0.0:
            v[:, k] *= np.conj(pivot) / abs(pivot)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def hermitian_eigenvalues(h) -> np.ndarray:
    return hermitian_eig(h).eigenvalues


def spectral_propagator(h, duration: float) -> np.ndarray:
    """exp(-i H t) for time-independent Hermitian H, via the eigensolver."""
    dec = hermitian_eig(h)
    phases = np.exp(-1j * dec.eigenvalues * duration)
    return (dec.eigenvectors * phases) @ dec.eigenvectors.conj().T

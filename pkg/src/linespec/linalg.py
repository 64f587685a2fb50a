"""Dense complex linear-algebra kernels used throughout the package.

All routines operate on plain numpy arrays. Hermitian inputs are accepted
up to a relative asymmetry of 1e-12 and symmetrized internally, because
iterative solvers feed back slightly asymmetric iterates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotPsdError, StabilityError, SymmetryError

HERM_RTOL = 1e-12

# Eigenvalues of nominally PSD matrices above this (negative) floor are
# treated as roundoff and clamped to zero.
PSD_CLAMP = -1e-12
PSD_REJECT = -1e-8


def _as_complex_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} contains non-finite entries")
    return M


def require_hermitian(M, name="matrix", rtol=HERM_RTOL):
    """Validate Hermitian symmetry to `rtol` relative and return (M + M*)/2."""
    M = _as_complex_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    scale = max(1.0, np.linalg.norm(M))
    asym = np.linalg.norm(M - M.conj().T)
    if asym > rtol * scale:
        raise SymmetryError(
            f"{name} is not Hermitian: relative asymmetry {asym / scale:.3e}"
        )
    return (M + M.conj().T) / 2.0


@dataclass(frozen=True)
class HermEig:
    """Eigendecomposition of a Hermitian matrix.

    values are sorted descending; vectors[:, k] is the unit eigenvector for
    values[k], so M = vectors @ diag(values) @ vectors.conj().T.
    """

    values: np.ndarray
    vectors: np.ndarray


def hermitian_eig(M, name="matrix") -> HermEig:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    H = require_hermitian(M, name)
    w, V = np.linalg.eigh(H)
    return HermEig(values=w[::-1].copy(), vectors=V[:, ::-1].copy())


def solve_discrete_lyapunov(A, Q):
    """Solve E - A E A* = Q for the unique E, with A Schur stable.

    Direct solve on the vectorized equation; at the matrix sizes this
    package works with (n <= a few hundred) the O(n^6) cost is irrelevant
    and the result is exact to rounding.
    """
    A = _as_complex_matrix(A, "A")
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got shape {A.shape}")
    Q = require_hermitian(Q, "Q")
    if Q.shape[0] != n:
        raise DimensionError(f"Q must match A: {Q.shape} vs {A.shape}")
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    if rho >= 1.0:
        raise StabilityError(f"spectral radius {rho:.6f} >= 1; A is not Schur stable")
    # vec(A E A*) = (conj(A) kron A) vec(E) with column-major vec
    M = np.eye(n * n, dtype=complex) - np.kron(A.conj(), A)
    e = np.linalg.solve(M, Q.reshape(-1, order="F"))
    E = e.reshape((n, n), order="F")
    return (E + E.conj().T) / 2.0


def hermitian_sqrt_psd(E):
    """Hermitian PSD principal square root S of a Hermitian PSD matrix E.

    Eigenvalues in [PSD_CLAMP, 0) are clamped to zero; anything below
    PSD_REJECT raises, since that indicates a genuinely indefinite input
    rather than roundoff.
    """
    eig = hermitian_eig(E, "E")
    if eig.values[-1] < PSD_REJECT:
        raise NotPsdError(
            f"matrix has eigenvalue {eig.values[-1]:.3e} < {PSD_REJECT:.0e}"
        )
    w = np.clip(eig.values, 0.0, None)
    S = (eig.vectors * np.sqrt(w)) @ eig.vectors.conj().T
    return (S + S.conj().T) / 2.0


def psd_project(M):
    """Frobenius-nearest PSD matrix: zero out negative eigenvalues."""
    H = require_hermitian(M)
    w, V = np.linalg.eigh(H)
    if w[0] >= 0.0:  # already PSD, w ascending
        return H
    P = (V * np.clip(w, 0.0, None)) @ V.conj().T
    return (P + P.conj().T) / 2.0


def lstsq(A, B):
    """Minimum-norm least-squares solution of A X = B."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    X, _, _, _ = np.linalg.lstsq(A, B, rcond=None)
    return X

"""State-space filter banks for band-selective spectral estimation.

A filter is a stable, reachable pair (A, b) driving the recursion
x(t) = A x(t-1) + b y(t). Bandpass designs are built from Jordan blocks
with a repeated complex pole near the band of interest; the degenerate
pole p = 0 gives the delay bank that simply stacks raw samples.

All filters handed to downstream code are normalized so that
A A* + b b* = I, which pins the geometry the covariance analysis relies
on. Normalization is a similarity transform computed from a discrete
Lyapunov solve and repeated until the condition holds to 1e-11, since a
single pass loses accuracy when the Lyapunov solution is ill-conditioned
(repeated poles of high multiplicity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConditioningError,
    ConfigError,
    DimensionError,
    InsufficientDataError,
    StabilityError,
)
from .linalg import hermitian_sqrt_psd, solve_discrete_lyapunov

NORMALIZATION_TOL = 1e-11
REACHABILITY_TOL = 1e-8
MAX_NORMALIZATION_PASSES = 8
TRANSIENT_ITER_CAP = 10**6


@dataclass(frozen=True)
class PoleSpec:
    """One (repeated) filter pole: p = modulus * exp(i * phase).

    modulus must lie in [0, 1) for Schur stability; modulus 0 yields a
    pure delay block.
    """

    modulus: float
    phase: float
    multiplicity: int = 1

    def __post_init__(self):
        if not (0.0 <= self.modulus < 1.0):
            raise ConfigError(f"pole modulus must be in [0, 1), got {self.modulus}")
        if self.multiplicity < 1:
            raise ConfigError(f"multiplicity must be >= 1, got {self.multiplicity}")
        object.__setattr__(self, "phase", float(self.phase) % (2.0 * math.pi))

    @property
    def value(self) -> complex:
        return self.modulus * complex(math.cos(self.phase), math.sin(self.phase))


@dataclass(frozen=True)
class GFilter:
    """Normalized filter pair (A, b) with its construction provenance.

    Invariants (established by normalize_filter): spectral radius of A
    strictly below one, (A, b) reachable, and ||A A* + b b* - I||_F
    below NORMALIZATION_TOL.
    """

    A: np.ndarray
    b: np.ndarray
    poles: tuple[PoleSpec, ...] = field(default=())

    def __post_init__(self):
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    @property
    def n(self) -> int:
        return self.b.shape[0]

    @property
    def is_delay_bank(self) -> bool:
        """True when built from a single pole at the origin."""
        return (
            len(self.poles) == 1
            and self.poles[0].modulus == 0.0
        )


@dataclass(frozen=True)
class OutputMatrix:
    """Post-transient filter states, one column per time step."""

    X: np.ndarray
    discarded: int
    origin_filter: GFilter

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] < 1:
            raise DimensionError(f"output matrix must have >= 1 column, got {self.X.shape}")
        if not np.all(np.isfinite(self.X)):
            raise DimensionError("output matrix contains non-finite entries")
        self.X.setflags(write=False)

    @property
    def n_outputs(self) -> int:
        return self.X.shape[1]


def build_jordan_filter(poles) -> tuple[np.ndarray, np.ndarray]:
    """Raw (un-normalized) block-Jordan pair for a list of PoleSpec.

    Each block carries the pole on the diagonal, ones on the
    superdiagonal, and contributes a unit entry in its last row of b,
    which makes the pair reachable.
    """
    poles = tuple(poles)
    if not poles:
        raise ConfigError("at least one pole is required")
    n = sum(p.multiplicity for p in poles)
    A = np.zeros((n, n), dtype=complex)
    b = np.zeros(n, dtype=complex)
    offset = 0
    for p in poles:
        k = p.multiplicity
        blk = np.eye(k, dtype=complex) * p.value
        for i in range(k - 1):
            blk[i, i + 1] = 1.0
        A[offset:offset + k, offset:offset + k] = blk
        b[offset + k - 1] = 1.0
        offset += k
    return A, b


def spectral_radius(A) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(A, dtype=complex)))))


def is_reachable(A, b, tol=REACHABILITY_TOL) -> bool:
    """Eigenvector (PBH) reachability test.

    The pair is reachable iff [lam*I - A, b] has full row rank at every
    eigenvalue lam of A. This is checked through the smallest singular
    value relative to ||A||; unlike the textbook Krylov-rank test it
    stays meaningful for repeated poles of high multiplicity, where the
    Krylov matrix is exponentially ill-conditioned even for exactly
    reachable pairs.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex).reshape(-1, 1)
    n = A.shape[0]
    lams = np.linalg.eigvals(A)
    # one PBH check per eigenvalue cluster; repeated poles collapse
    lams = np.unique(np.round(lams.real, 9) + 1j * np.round(lams.imag, 9))
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    eye = np.eye(n)
    for lam in lams:
        M = np.hstack([lam * eye - A, b])
        smin = np.linalg.svd(M, compute_uv=False)[-1]
        if smin <= tol * scale:
            return False
    return True


def normalize_filter(A_raw, b_raw, poles=()) -> GFilter:
    """Similarity-transform (A, b) so that A A* + b b* = I.

    Solves E - A E A* = b b* and applies (A, b) <- (S^-1 A S, S^-1 b)
    with S the Hermitian PSD square root of E. One pass leaves residual
    ~sqrt(eps)*cond(E), so the step is repeated (each later pass sees a
    nearly identity E) until the residual is below NORMALIZATION_TOL.
    """
    A = np.asarray(A_raw, dtype=complex).copy()
    b = np.asarray(b_raw, dtype=complex).reshape(-1).copy()
    n = b.shape[0]
    if A.shape != (n, n):
        raise DimensionError(f"A shape {A.shape} does not match b length {n}")
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise StabilityError(f"spectral radius {rho:.6f} >= 1; cannot normalize")
    if not is_reachable(A, b):
        raise ConditioningError("pair (A, b) is numerically unreachable")

    eye = np.eye(n)
    for _ in range(MAX_NORMALIZATION_PASSES):
        residual = np.linalg.norm(A @ A.conj().T + np.outer(b, b.conj()) - eye)
        if residual < NORMALIZATION_TOL:
            return GFilter(A=A, b=b, poles=tuple(poles))
        E = solve_discrete_lyapunov(A, np.outer(b, b.conj()))
        S = hermitian_sqrt_psd(E)
        try:
            A = np.linalg.solve(S, A @ S)
            b = np.linalg.solve(S, b)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"Lyapunov solution numerically singular: {exc}")
    raise ConditioningError(
        f"normalization did not reach {NORMALIZATION_TOL:g} in "
        f"{MAX_NORMALIZATION_PASSES} passes (last residual {residual:.3e})"
    )


def design_filter(poles, n=None) -> GFilter:
    """Build and normalize a Jordan filter in one step."""
    poles = tuple(poles)
    A, b = build_jordan_filter(poles)
    if n is not None and b.shape[0] != n:
        raise ConfigError(f"pole multiplicities sum to {b.shape[0]}, expected {n}")
    return normalize_filter(A, b, poles=poles)


def transfer_vector(f: GFilter, theta: float) -> np.ndarray:
    """Frequency response G(e^{i theta}) = z (z I - A)^{-1} b at z = e^{i theta}."""
    z = np.exp(1j * (float(theta) % (2.0 * np.pi)))
    return z * np.linalg.solve(z * np.eye(f.n) - f.A, f.b)


def transfer_grid(f: GFilter, thetas) -> np.ndarray:
    """Frequency response on many points at once; returns shape (len(thetas), n).

    Batched linear solves; equivalent to calling transfer_vector per point.
    """
    thetas = np.asarray(thetas, dtype=float)
    z = np.exp(1j * thetas)
    lhs = z[:, None, None] * np.eye(f.n) - f.A[None, :, :]
    rhs = np.broadcast_to(f.b[None, :, None], (thetas.size, f.n, 1))
    return (z[:, None] * np.linalg.solve(lhs, rhs)[:, :, 0])


def squared_gain_profile(f: GFilter, grid_size: int):
    """Squared gain ||G(e^{i theta})||^2 on a uniform grid over [0, 2pi).

    Returns (thetas, gains) as float arrays.
    """
    if grid_size < 2:
        raise ConfigError(f"grid_size must be >= 2, got {grid_size}")
    thetas = np.linspace(0.0, 2.0 * np.pi, grid_size, endpoint=False)
    G = transfer_grid(f, thetas)
    return thetas, np.sum(np.abs(G) ** 2, axis=1)


def transient_length(f: GFilter, eps: float) -> int:
    """Smallest L_s >= 1 with ||A^{L_s}||_2 < eps (spectral norm).

    Powers are formed by repeated multiplication so that the non-normal
    transient growth of Jordan blocks is observed, not estimated.
    """
    if not (0.0 < eps < 1.0):
        raise ConfigError(f"eps must be in (0, 1), got {eps}")
    P = np.eye(f.n, dtype=complex)
    for k in range(1, TRANSIENT_ITER_CAP + 1):
        P = P @ f.A
        if np.linalg.norm(P, 2) < eps:
            return k
    raise ConditioningError(f"||A^k|| did not fall below {eps} within {TRANSIENT_ITER_CAP} steps")


def apply_filter(f: GFilter, y, eps: float, transient_override=None) -> OutputMatrix:
    """Run the state recursion over y and keep the post-transient states.

    Starts from x(-1) = 0, discards the first L_s states where
    L_s = transient_length(f, eps), and returns the remaining states as
    columns of an n x (L - L_s) matrix in time order. transient_override
    bypasses the transient rule with an explicit L_s (used by pipelines
    that consume a single fully loaded state).
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    L = y.shape[0]
    Ls = transient_length(f, eps) if transient_override is None else int(transient_override)
    if Ls < 0:
        raise ConfigError(f"transient override must be >= 0, got {Ls}")
    if L <= Ls:
        raise InsufficientDataError(
            f"signal length {L} must exceed the transient length {Ls}",
            required_length=Ls + 1,
        )
    X = np.empty((f.n, L - Ls), dtype=complex)
    x = np.zeros(f.n, dtype=complex)
    for t in range(L):
        x = f.A @ x + f.b * y[t]
        if t >= Ls:
            X[:, t - Ls] = x
    return OutputMatrix(X=X, discarded=Ls, origin_filter=f)

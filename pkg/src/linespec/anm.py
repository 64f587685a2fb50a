"""Atomic-norm semidefinite programs over filter-bank output matrices.

Two problems share one solver. The exact (noiseless) program evaluates
the atomic norm of a data matrix S as

    min 0.5 (tr Z + tr Sigma)   s.t.  [[Z, S*], [S, Sigma]] >= 0,
                                      Sigma in the output-covariance subspace,

and the denoising program replaces the fixed S by a variable penalized by
0.5 ||X - S||_F^2 + lambda * (atomic norm of S).

The output-covariance subspace is the set of Hermitian Sigma with
(I - Pi_b)(Sigma - A Sigma A*)(I - Pi_b) = 0. The solver is a two-block
ADMM: one block carries the smooth objective plus the affine constraints
(closed-form update plus an orthogonal subspace projection), the other is
the PSD cone of the full (L_x + n) block matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, SolverFailure
from .gfilter import GFilter
from .linalg import psd_project, require_hermitian

PERIODOGRAM_TRIM = 0.75


# ---------------------------------------------------------------------------
# Real coordinates on the space of Hermitian matrices
# ---------------------------------------------------------------------------

def herm_to_coords(M: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a Hermitian matrix (n^2 reals).

    Layout: diagonal (real), then sqrt(2) * real and sqrt(2) * imaginary
    parts of the strict upper triangle. The map preserves the Frobenius
    inner product.
    """
    n = M.shape[0]
    iu = np.triu_indices(n, 1)
    upper = M[iu]
    return np.concatenate([
        M.diagonal().real,
        math.sqrt(2.0) * upper.real,
        math.sqrt(2.0) * upper.imag,
    ])


def coords_to_herm(v: np.ndarray, n: int) -> np.ndarray:
    M = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    m = iu[0].size
    M[np.diag_indices(n)] = v[:n]
    upper = (v[n:n + m] + 1j * v[n + m:n + 2 * m]) / math.sqrt(2.0)
    M[iu] = upper
    M[(iu[1], iu[0])] = upper.conj()
    return M


# ---------------------------------------------------------------------------
# The covariance subspace and its projection
# ---------------------------------------------------------------------------

def constraint_residual(Sigma, f: GFilter) -> float:
    """Frobenius norm of (I - Pi_b)(Sigma - A Sigma A*)(I - Pi_b)."""
    Sigma = np.asarray(Sigma, dtype=complex)
    if Sigma.shape != (f.n, f.n):
        raise DimensionError(f"Sigma shape {Sigma.shape} does not match filter size {f.n}")
    Pi = np.outer(f.b, f.b.conj()) / np.vdot(f.b, f.b).real
    W = np.eye(f.n) - Pi
    return float(np.linalg.norm(W @ (Sigma - f.A @ Sigma @ f.A.conj().T) @ W))


class RangeGammaSubspace:
    """Orthogonal projector onto the subspace of admissible output covariances.

    Two constructions exist: the general one assembles the constraint map
    of the filter on Hermitian coordinates and extracts its null space by
    SVD (cached; fine for filter sizes up to a few dozen), and a directly
    coded Toeplitz variant (diagonal averaging) that serves both as the
    subspace of the delay bank at any size and as an independent oracle
    for the general path.
    """

    def __init__(self, n: int, basis: np.ndarray | None, toeplitz: bool = False):
        self.n = n
        self.basis = basis
        self.toeplitz = toeplitz
        if toeplitz:
            offsets = np.subtract.outer(np.arange(n), np.arange(n)).T + (n - 1)
            self._diag_index = offsets
            self._diag_counts = np.bincount(offsets.ravel(), minlength=2 * n - 1)

    @classmethod
    def from_filter(cls, f: GFilter) -> "RangeGammaSubspace":
        n = f.n
        Pi = np.outer(f.b, f.b.conj()) / np.vdot(f.b, f.b).real
        W = np.eye(n) - Pi
        dim = n * n
        K = np.empty((dim, dim))
        unit = np.zeros(dim)
        for j in range(dim):
            unit[j] = 1.0
            Mj = coords_to_herm(unit, n)
            KM = W @ (Mj - f.A @ Mj @ f.A.conj().T) @ W
            K[:, j] = herm_to_coords((KM + KM.conj().T) / 2.0)
            unit[j] = 0.0
        _, s, vt = np.linalg.svd(K)
        null_rows = np.concatenate([s <= 1e-10 * s[0], np.ones(dim - s.size, dtype=bool)])
        return cls(n=n, basis=vt[null_rows].T.copy())

    @classmethod
    def toeplitz_subspace(cls, n: int) -> "RangeGammaSubspace":
        return cls(n=n, basis=None, toeplitz=True)

    @property
    def dim(self) -> int:
        return 2 * self.n - 1 if self.toeplitz else self.basis.shape[1]

    def project(self, M: np.ndarray) -> np.ndarray:
        """Frobenius-nearest element of the subspace (M assumed Hermitian)."""
        if self.toeplitz:
            idx = self._diag_index
            sums = np.bincount(idx.ravel(), weights=M.real.ravel(), minlength=2 * self.n - 1) \
                + 1j * np.bincount(idx.ravel(), weights=M.imag.ravel(), minlength=2 * self.n - 1)
            means = sums / self._diag_counts
            P = means[idx]
            return (P + P.conj().T) / 2.0
        v = herm_to_coords(M)
        return coords_to_herm(self.basis @ (self.basis.T @ v), self.n)

    def distance(self, M: np.ndarray) -> float:
        return float(np.linalg.norm(M - self.project(M)))


def project_range_gamma(Sigma, f: GFilter) -> np.ndarray:
    """One-shot orthogonal projection onto the admissible-covariance subspace.

    Builds the subspace basis for the filter; reuse a RangeGammaSubspace
    when projecting repeatedly.
    """
    Sigma = require_hermitian(Sigma, "Sigma")
    return RangeGammaSubspace.from_filter(f).project(Sigma)


# ---------------------------------------------------------------------------
# Problem and solution containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SdpProblem:
    """One SDP instance: noiseless (atomic-norm evaluation) or denoise.

    data holds S (noiseless) or X (denoise), with one row per filter
    state. `subspace` may carry a precomputed projector; otherwise it is
    built from the filter on first solve.
    """

    filter: GFilter
    data: np.ndarray
    mode: str = "denoise"
    lam: float = 0.0
    subspace: RangeGammaSubspace | None = None

    def __post_init__(self):
        if self.mode not in ("noiseless", "denoise"):
            raise ConfigError(f"mode must be 'noiseless' or 'denoise', got {self.mode!r}")
        data = np.asarray(self.data, dtype=complex)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        if data.shape[0] != self.filter.n:
            raise DimensionError(
                f"data has {data.shape[0]} rows but the filter size is {self.filter.n}"
            )
        if self.mode == "denoise" and not self.lam > 0.0:
            raise ConfigError(f"denoise mode needs lambda > 0, got {self.lam}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_outputs(self) -> int:
        return self.data.shape[1]


@dataclass
class SdpSolution:
    Z_hat: np.ndarray
    Sigma_hat: np.ndarray
    S_hat: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    status: str  # optimal | max_iters | infeasible_like


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    max_iterations: int = 50_000
    rho: float = 1.0
    check_every: int = 10
    # warm start: (W0, U0) pair of Hermitian (L_x + n) matrices
    initial: tuple | None = None


_DEFAULT_OPTIONS = SolverOptions()


# ---------------------------------------------------------------------------
# ADMM solver
# ---------------------------------------------------------------------------

def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    """Solve the SDP by two-block ADMM with adaptive penalty.

    Splitting: T carries the trace/data objective, the fixed-data block
    (noiseless) and the covariance subspace; W carries the PSD cone.
    Convergence requires relative primal and dual residuals below tol and
    the returned covariance block within tol of the subspace.
    """
    opts = options or _DEFAULT_OPTIONS
    sub = problem.subspace or RangeGammaSubspace.from_filter(problem.filter)
    if sub.n != problem.filter.n:
        raise DimensionError("subspace size does not match the filter")

    X = problem.data
    n, Lx = X.shape[0], X.shape[1]
    N = Lx + n
    noiseless = problem.mode == "noiseless"
    cost = 1.0 if noiseless else problem.lam
    rho = opts.rho
    tol = opts.tol

    sl_z = slice(0, Lx)
    sl_s = slice(Lx, N)
    eye_z = np.eye(Lx)
    eye_s = np.eye(n)

    if opts.initial is not None:
        W = np.asarray(opts.initial[0], dtype=complex).copy()
        U = np.asarray(opts.initial[1], dtype=complex).copy()
        if W.shape != (N, N) or U.shape != (N, N):
            raise DimensionError(f"warm start must be {N}x{N} matrices")
    else:
        W = np.zeros((N, N), dtype=complex)
        U = np.zeros((N, N), dtype=complex)

    data_scale = max(1.0, float(np.linalg.norm(X)))
    blowup_limit = 1e10 * data_scale

    T = np.zeros((N, N), dtype=complex)
    status = "max_iters"
    rel_primal = np.inf
    rel_dual = np.inf
    it = 0
    for it in range(1, opts.max_iterations + 1):
        V = W - U
        Vz = V[sl_z, sl_z]
        Vsig = V[sl_s, sl_s]
        Z = (Vz + Vz.conj().T) / 2.0 - (cost / (2.0 * rho)) * eye_z
        S = X if noiseless else (X + 2.0 * rho * V[sl_s, sl_z]) / (1.0 + 2.0 * rho)
        Sig = sub.project((Vsig + Vsig.conj().T) / 2.0 - (cost / (2.0 * rho)) * eye_s)
        T[sl_z, sl_z] = Z
        T[sl_s, sl_z] = S
        T[sl_z, sl_s] = S.conj().T
        T[sl_s, sl_s] = Sig

        W_prev = W
        W = psd_project(T + U)
        U = U + T - W

        if it % opts.check_every == 0 or it == opts.max_iterations:
            r = float(np.linalg.norm(T - W))
            s = rho * float(np.linalg.norm(W - W_prev))
            norm_T = float(np.linalg.norm(T))
            norm_W = float(np.linalg.norm(W))
            if not (np.isfinite(r) and np.isfinite(s)):
                raise SolverFailure(
                    "non-finite iterates in ADMM",
                    iterate_norms={"T": norm_T, "W": norm_W, "rho": rho},
                )
            if norm_T > blowup_limit or norm_W > blowup_limit:
                status = "infeasible_like"
                rel_primal = r / max(1.0, norm_T, norm_W)
                rel_dual = s / max(1.0, rho * float(np.linalg.norm(U)))
                break
            rel_primal = r / max(1.0, norm_T, norm_W)
            rel_dual = s / max(1.0, rho * float(np.linalg.norm(U)))
            Sig_W = W[sl_s, sl_s]
            feas = sub.distance((Sig_W + Sig_W.conj().T) / 2.0)
            if (
                rel_primal < tol
                and rel_dual < tol
                and feas <= 0.5 * tol * (1.0 + float(np.linalg.norm(Sig_W)))
            ):
                status = "optimal"
                break
            # residual balancing keeps the two residuals within a decade
            if rel_primal > 10.0 * rel_dual and rho < 1e6:
                rho *= 2.0
                U /= 2.0
            elif rel_dual > 10.0 * rel_primal and rho > 1e-6:
                rho /= 2.0
                U *= 2.0

    Z_hat = W[sl_z, sl_z]
    Sigma_hat = W[sl_s, sl_s]
    Z_hat = (Z_hat + Z_hat.conj().T) / 2.0
    Sigma_hat = (Sigma_hat + Sigma_hat.conj().T) / 2.0
    S_hat = X if noiseless else W[sl_s, sl_z].copy()
    traces = 0.5 * (np.trace(Z_hat).real + np.trace(Sigma_hat).real)
    if noiseless:
        objective = traces
    else:
        objective = 0.5 * float(np.linalg.norm(X - S_hat)) ** 2 + problem.lam * traces
    return SdpSolution(
        Z_hat=Z_hat,
        Sigma_hat=Sigma_hat,
        S_hat=S_hat,
        objective=float(objective),
        primal_residual=float(rel_primal),
        dual_residual=float(rel_dual),
        iterations=it,
        status=status,
    )


def atomic_norm(S, f: GFilter, subspace: RangeGammaSubspace | None = None,
                options: SolverOptions | None = None) -> float:
    """Atomic norm of S with respect to the filter's atom set."""
    problem = SdpProblem(filter=f, data=S, mode="noiseless", subspace=subspace)
    return solve(problem, options).objective


# ---------------------------------------------------------------------------
# Noise level and regularization weight
# ---------------------------------------------------------------------------

def estimate_noise_variance(y) -> float:
    """Noise variance estimate from the low quantiles of the periodogram.

    The periodogram of circular white noise is i.i.d. exponential with
    mean sigma^2, so the mean of the smallest 75% of the values, divided
    by the exponential truncated-mean factor 1 - ln(4)/3, is consistent;
    trimming the top quartile keeps a few strong spectral lines from
    inflating the estimate.
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    L = y.shape[0]
    if L < 16:
        raise ConfigError(f"need at least 16 samples to estimate noise, got {L}")
    if not np.any(y):
        return 0.0
    periodogram = np.abs(np.fft.fft(y)) ** 2 / L
    periodogram.sort()
    k = int(math.floor(PERIODOGRAM_TRIM * L))
    trimmed_mean = float(periodogram[:k].mean())
    consistency = 1.0 - math.log(4.0) / 3.0
    return trimmed_mean / consistency


@dataclass(frozen=True)
class RegParams:
    """Regularization weight and the intermediate quantities behind it."""

    lam: float
    sigma_hat: float
    beta: float
    alpha: float


def lambda_heuristic(sigma_hat: float, n: int, L: int, Lx: int,
                     sqrt_term_uses_outputs: bool = False) -> RegParams:
    """Regularization weight lambda = sigma_hat * sqrt(1 + 1/log n) * beta.

    beta^2 = L_x + log(alpha L_x) + sqrt(2 L log(alpha L_x))
             + sqrt(pi L_x / 2) + 1,   alpha = 8 pi n log n.

    The sqrt term mixes the raw signal length L with the output count
    L_x; `sqrt_term_uses_outputs` switches that L to L_x for sensitivity
    checks. Natural logarithms throughout.
    """
    if n < 2:
        raise ConfigError(f"filter size must be >= 2, got {n}")
    if not (L >= Lx >= 1):
        raise ConfigError(f"need L >= L_x >= 1, got L={L}, L_x={Lx}")
    if sigma_hat < 0.0:
        raise ConfigError(f"sigma_hat must be >= 0, got {sigma_hat}")
    alpha = 8.0 * math.pi * n * math.log(n)
    log_aLx = math.log(alpha * Lx)
    length = Lx if sqrt_term_uses_outputs else L
    beta = math.sqrt(
        Lx + log_aLx + math.sqrt(2.0 * length * log_aLx) + math.sqrt(math.pi * Lx / 2.0) + 1.0
    )
    lam = sigma_hat * math.sqrt(1.0 + 1.0 / math.log(n)) * beta
    return RegParams(lam=lam, sigma_hat=sigma_hat, beta=beta, alpha=alpha)

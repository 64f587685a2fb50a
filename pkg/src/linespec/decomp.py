"""Line-spectrum extraction from an optimized output covariance.

A covariance produced by the SDP stage is (numerically) rank deficient
when spectral lines are present. Its rank estimates the line count, the
eigenvectors of the (near-)zero eigenvalues define a nonnegative trig
function whose minima locate the frequencies, and the powers follow from
a least-squares fit over the implied rank-one dictionary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import anm
from .errors import (
    ConditioningError,
    ConfigError,
    DimensionError,
    EstimationStageError,
    FullRankError,
)
from .gfilter import GFilter, OutputMatrix, transfer_grid, transfer_vector
from .linalg import hermitian_eig, require_hermitian

GRID_SIZE = 8192
REFINE_WIDTH = 1e-10
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
POWER_FLOOR = 1e-12
DICTIONARY_CONDITION_LIMIT = 1e10


@dataclass(frozen=True)
class RankRule:
    """Numerical-rank thresholds: absolute eigenvalue floor and gap ratio."""

    abs_threshold: float = 1e-3
    ratio_threshold: float = 1e3

    def __post_init__(self):
        if self.abs_threshold <= 0.0 or self.ratio_threshold <= 0.0:
            raise ConfigError("rank-rule thresholds must be positive")


@dataclass(frozen=True)
class LineSpectrum:
    """Estimated line count, frequencies (ascending) and powers.

    powers is None when only frequencies were extracted. under_resolved
    marks spectra where fewer minima were found than the numerical rank
    demanded; powers_clamped marks nonpositive fitted powers raised to a
    tiny floor.
    """

    count: int
    frequencies: np.ndarray
    powers: np.ndarray | None = None
    under_resolved: bool = False
    powers_clamped: bool = False

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        freqs.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        if freqs.size != self.count:
            raise DimensionError(f"count {self.count} != {freqs.size} frequencies")
        if freqs.size and (freqs.min() < 0.0 or freqs.max() >= 2.0 * np.pi):
            raise ConfigError("frequencies must lie in [0, 2pi)")
        if np.any(np.diff(freqs) <= 0.0):
            raise ConfigError("frequencies must be strictly increasing")
        if self.powers is not None:
            p = np.asarray(self.powers, dtype=float)
            p.setflags(write=False)
            object.__setattr__(self, "powers", p)
            if p.shape != freqs.shape:
                raise DimensionError("powers must align with frequencies")
            if p.size and p.min() <= 0.0:
                raise ConfigError("powers must be positive")


def numerical_rank(eigenvalues, rule: RankRule = RankRule()) -> int:
    """Line count from sorted-descending eigenvalues.

    Smallest k in 1..n-1 with tau[k+1] below the absolute threshold or
    tau[k]/tau[k+1] above the ratio threshold; n when neither triggers;
    0 when even the leading eigenvalue is below the absolute threshold.
    """
    taus = np.asarray(eigenvalues, dtype=float).reshape(-1)
    if taus.size < 1:
        raise ConfigError("need at least one eigenvalue")
    if np.any(np.diff(taus) > 0.0):
        raise ConfigError("eigenvalues must be sorted descending")
    if taus[0] < rule.abs_threshold:
        return 0
    for k in range(1, taus.size):
        if taus[k] < rule.abs_threshold:
            return k
        if taus[k - 1] > rule.ratio_threshold * taus[k]:
            return k
    return taus.size


def null_function(U, f: GFilter, theta: float) -> float:
    """Squared norm of the null-space component of the filter response.

    U stacks orthonormal eigenvectors spanning the (near-)null space of
    the covariance; the function vanishes exactly at the true line
    frequencies of a rank-deficient covariance.
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != f.n:
        raise DimensionError(f"U must be {f.n} x k, got {U.shape}")
    if U.shape[1] == 0:
        raise ConfigError("null space is empty (full-rank covariance)")
    g = transfer_vector(f, theta)
    return float(np.linalg.norm(U.conj().T @ g) ** 2)


def null_function_profile(U, f: GFilter, grid_size: int = GRID_SIZE):
    """Null function sampled on a uniform grid over [0, 2pi)."""
    thetas = np.linspace(0.0, 2.0 * np.pi, grid_size, endpoint=False)
    G = transfer_grid(f, thetas)
    return thetas, np.sum(np.abs(G.conj() @ U) ** 2, axis=1)


def _refine_minimum(f: GFilter, U, lo: float, hi: float) -> tuple[float, float]:
    """Golden-section search for the minimum of the null function in [lo, hi]."""

    def d(theta):
        g = transfer_vector(f, theta)
        return float(np.linalg.norm(U.conj().T @ g) ** 2)

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = d(x1), d(x2)
    while hi - lo > REFINE_WIDTH:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = d(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = d(x2)
    mid = 0.5 * (lo + hi)
    return d(mid), mid % (2.0 * np.pi)


def extract_frequencies(Sigma, f: GFilter, rule: RankRule = RankRule(),
                        grid_size: int = GRID_SIZE) -> LineSpectrum:
    """Frequencies of the line spectrum encoded in a covariance matrix.

    Pipeline: numerical rank from the clamped eigenvalues, then a dense
    grid scan of the null function for circular local minima, refined by
    golden-section search; the rank smallest minima are kept and sorted.
    Powers are left unfilled.
    """
    Sigma = require_hermitian(Sigma, "Sigma")
    if Sigma.shape[0] != f.n:
        raise DimensionError(f"Sigma size {Sigma.shape[0]} != filter size {f.n}")
    eig = hermitian_eig(Sigma)
    taus = np.clip(eig.values, 0.0, None)
    r = numerical_rank(taus, rule)
    if r == 0:
        return LineSpectrum(count=0, frequencies=np.empty(0))
    if r == f.n:
        raise FullRankError(
            f"covariance has full numerical rank {r}; no null space to search"
        )
    U = eig.vectors[:, r:]  # eigenvectors of the n - r smallest eigenvalues

    thetas, dvals = null_function_profile(U, f, grid_size)
    is_min = (dvals < np.roll(dvals, 1)) & (dvals < np.roll(dvals, -1))
    candidates = np.flatnonzero(is_min)
    step = 2.0 * np.pi / grid_size
    refined = []
    for idx in candidates:
        val, theta = _refine_minimum(f, U, thetas[idx] - step, thetas[idx] + step)
        refined.append((val, theta))
    refined.sort()

    # drop duplicates (bracket overlap can converge to one minimum twice)
    kept: list[tuple[float, float]] = []
    for val, theta in refined:
        if all(_circ_dist(theta, t) > 1e-8 for _, t in kept):
            kept.append((val, theta))
        if len(kept) == r:
            break
    freqs = np.sort(np.array([t for _, t in kept]))
    return LineSpectrum(
        count=freqs.size,
        frequencies=freqs,
        under_resolved=freqs.size < r,
    )


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % (2.0 * np.pi)
    return min(d, 2.0 * np.pi - d)


def recover_powers(Sigma, f: GFilter, frequencies) -> tuple[np.ndarray, bool]:
    """Least-squares powers for given frequencies.

    Fits Sigma as sum_k rho_k G(theta_k) G(theta_k)* in the Frobenius
    sense with real rho. Returns (powers, clamped) where clamped reports
    whether any nonpositive fit was raised to the floor.
    """
    freqs = np.asarray(frequencies, dtype=float).reshape(-1)
    if freqs.size == 0:
        raise ConfigError("need at least one frequency")
    if np.unique(freqs).size != freqs.size:
        raise ConfigError("frequencies must be distinct")
    Sigma = require_hermitian(Sigma, "Sigma")
    G = transfer_grid(f, freqs)  # (r, n)
    atoms = np.einsum("ki,kj->kij", G, G.conj()).reshape(freqs.size, -1).T  # (n^2, r)
    D = np.vstack([atoms.real, atoms.imag])
    target = np.concatenate([Sigma.real.ravel(), Sigma.imag.ravel()])
    rho, _, _, sv = np.linalg.lstsq(D, target, rcond=None)
    if sv.size and sv[0] > 0 and sv[0] / max(sv[-1], 1e-300) > DICTIONARY_CONDITION_LIMIT:
        raise ConditioningError(
            f"rank-one dictionary condition {sv[0] / sv[-1]:.3e} exceeds "
            f"{DICTIONARY_CONDITION_LIMIT:.0e} (frequencies nearly collinear)"
        )
    clamped = bool(np.any(rho < POWER_FLOOR))
    return np.maximum(rho, POWER_FLOOR), clamped


def estimate_line_spectrum(X: OutputMatrix, f: GFilter, lam: float,
                           rule: RankRule = RankRule(),
                           subspace: anm.RangeGammaSubspace | None = None,
                           solver_options: anm.SolverOptions | None = None,
                           with_solution: bool = False):
    """Full estimation pipeline: denoise SDP, rank, frequencies, powers.

    Stage failures are re-raised tagged with the stage name. Returns the
    LineSpectrum, or (LineSpectrum, SdpSolution) with with_solution.
    """
    try:
        problem = anm.SdpProblem(filter=f, data=X.X, mode="denoise", lam=lam,
                                 subspace=subspace)
        solution = anm.solve(problem, solver_options)
    except Exception as exc:
        raise EstimationStageError("sdp_solve", str(exc)) from exc

    try:
        spectrum = extract_frequencies(solution.Sigma_hat, f, rule)
    except Exception as exc:
        raise EstimationStageError("frequency_extraction", str(exc)) from exc

    if spectrum.count > 0:
        try:
            powers, clamped = recover_powers(solution.Sigma_hat, f, spectrum.frequencies)
        except Exception as exc:
            raise EstimationStageError("power_recovery", str(exc)) from exc
        spectrum = LineSpectrum(
            count=spectrum.count,
            frequencies=spectrum.frequencies,
            powers=powers,
            under_resolved=spectrum.under_resolved,
            powers_clamped=clamped,
        )
    else:
        spectrum = LineSpectrum(count=0, frequencies=np.empty(0), powers=np.empty(0))
    return (spectrum, solution) if with_solution else spectrum

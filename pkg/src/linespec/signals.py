"""Synthesis of cisoid-plus-noise test signals and experiment frequency layouts.

Noise is circular complex white Gaussian: total variance sigma^2 split
evenly between the real and imaginary parts. All randomness flows through
numpy's Philox counter-based generator so that runs are reproducible from
a single 64-bit seed and trial streams can be derived independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

RNG_ALGORITHM = "philox4x64"  # recorded in experiment metadata

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CisoidSpec:
    """Deterministic part of the signal: sum of amplitudes[k] * e^{i freq[k] t}.

    Frequencies must be pairwise distinct and live in [0, 2pi). An empty
    spec (m = 0) is allowed and describes a pure-noise signal.
    """

    amplitudes: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.amplitudes, dtype=complex))
        th = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        if a.shape != th.shape or a.ndim != 1:
            raise ConfigError(
                f"amplitudes and frequencies must be equal-length vectors, "
                f"got {a.shape} and {th.shape}"
            )
        if th.size and (th.min() < 0.0 or th.max() >= TWO_PI):
            raise ConfigError("frequencies must lie in [0, 2pi)")
        if np.unique(th).size != th.size:
            raise ConfigError("frequencies must be pairwise distinct")
        a.setflags(write=False)
        th.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "frequencies", th)

    @property
    def count(self) -> int:
        return self.frequencies.size


@dataclass(frozen=True)
class NoiseSpec:
    variance: float
    seed: int

    def __post_init__(self):
        if self.variance <= 0.0:
            raise ConfigError(f"noise variance must be positive, got {self.variance}")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))


def complex_white_noise(rng: np.random.Generator, variance: float, L: int) -> np.ndarray:
    """i.i.d. circular complex Gaussian, total variance `variance` per sample."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(L) + 1j * rng.standard_normal(L))


def generate_signal(spec: CisoidSpec, L: int, noise: NoiseSpec | None = None,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Sample y(t) = sum_k a_k e^{i theta_k t} + w(t) for t = 0 .. L-1.

    Without `noise`, w = 0. With `noise`, w is drawn from `rng` when
    given (callers that interleave other draws on the same stream) or
    from a fresh Philox stream seeded by noise.seed.
    """
    if L < 1:
        raise ConfigError(f"signal length must be >= 1, got {L}")
    t = np.arange(L)
    if spec.count:
        y = (spec.amplitudes[None, :] * np.exp(1j * np.outer(t, spec.frequencies))).sum(axis=1)
    else:
        y = np.zeros(L, dtype=complex)
    if noise is not None:
        if rng is None:
            rng = make_rng(noise.seed)
        y = y + complex_white_noise(rng, noise.variance, L)
    return y


def snr_to_sigma2(snr_db: float, amplitude_modulus: float) -> float:
    """Noise variance for a requested per-component SNR in dB.

    SNR is defined as 10 log10(|a|^2 / sigma^2), so
    sigma^2 = |a|^2 * 10^(-snr/10).
    """
    if amplitude_modulus <= 0.0:
        raise ConfigError(f"amplitude modulus must be positive, got {amplitude_modulus}")
    return amplitude_modulus**2 * 10.0 ** (-snr_db / 10.0)


def fft_resolution(L: int) -> float:
    """Grid resolution 2pi/L of an L-point DFT."""
    if L < 1:
        raise ConfigError(f"L must be >= 1, got {L}")
    return TWO_PI / L


def experiment_frequencies(theta0: float, layout: str, L: int) -> np.ndarray:
    """Frequency layouts used by the benchmark scenarios.

    three_spaced: theta0 + (-2, 0, +2) * (2pi/L), neighbors separated by
    twice the DFT resolution. two_close: theta0 +- (pi/L), separated by
    exactly one DFT resolution.
    """
    delta = fft_resolution(L)
    if layout == "three_spaced":
        out = np.array([theta0 - 2 * delta, theta0, theta0 + 2 * delta])
    elif layout == "two_close":
        out = np.array([theta0 - delta / 2.0, theta0 + delta / 2.0])
    else:
        raise ConfigError(f"unknown layout {layout!r}")
    if out.min() < 0.0 or out.max() >= TWO_PI:
        raise ConfigError(
            f"layout {layout!r} at theta0={theta0} leaves [0, 2pi); adjust theta0 or L"
        )
    return out

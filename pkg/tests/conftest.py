import numpy as np
import pytest

from linespec.anm import RangeGammaSubspace
from linespec.gfilter import PoleSpec, design_filter


@pytest.fixture(scope="session")
def g1():
    """Bandpass bank: repeated pole 0.58 e^{2i}, size 20."""
    return design_filter([PoleSpec(0.58, 2.0, 20)])


@pytest.fixture(scope="session")
def g2():
    """Two-passband bank: poles 0.58 e^{1.7i} and 0.58 e^{3.3i}, 10 each."""
    return design_filter([PoleSpec(0.58, 1.7, 10), PoleSpec(0.58, 3.3, 10)])


@pytest.fixture(scope="session")
def delay20():
    return design_filter([PoleSpec(0.0, 0.0, 20)])


@pytest.fixture(scope="session")
def small_filter():
    """Size-6 bandpass bank; keeps SDP unit tests fast."""
    return design_filter([PoleSpec(0.5, 2.0, 6)])


@pytest.fixture(scope="session")
def g1_subspace(g1):
    return RangeGammaSubspace.from_filter(g1)


@pytest.fixture(scope="session")
def small_subspace(small_filter):
    return RangeGammaSubspace.from_filter(small_filter)


def random_hermitian(rng, n, scale=1.0):
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (M + M.conj().T) / 2.0


def random_unitary(rng, n):
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(M)
    return Q * (np.diagonal(R) / np.abs(np.diagonal(R)))


def random_stable_pair(rng, n, radius=0.7):
    """Random Schur-stable reachable pair with spectral radius ~radius."""
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A *= radius / np.max(np.abs(np.linalg.eigvals(A)))
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return A, b

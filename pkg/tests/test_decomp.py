import numpy as np
import pytest

from linespec.decomp import (
    LineSpectrum,
    RankRule,
    estimate_line_spectrum,
    extract_frequencies,
    null_function,
    numerical_rank,
    recover_powers,
)
from linespec.errors import (
    ConditioningError,
    ConfigError,
    EstimationStageError,
    FullRankError,
)
from linespec.gfilter import (
    PoleSpec,
    apply_filter,
    design_filter,
    transfer_vector,
)
from linespec.linalg import hermitian_eig
from linespec.signals import CisoidSpec, generate_signal

from conftest import random_unitary


def line_covariance(f, thetas, powers):
    """Forward construction: Sigma = sum_k rho_k G(theta_k) G(theta_k)*."""
    Sigma = np.zeros((f.n, f.n), dtype=complex)
    for theta, rho in zip(thetas, powers):
        G = transfer_vector(f, theta)
        Sigma += rho * np.outer(G, G.conj())
    return Sigma


class TestNumericalRank:
    def test_absolute_branch(self):
        assert numerical_rank([5.0, 3.0, 1e-9, 1e-12]) == 2

    def test_ratio_branch(self):
        assert numerical_rank([10.0, 5.0, 0.004, 0.002]) == 2

    def test_degenerate_leading(self):
        assert numerical_rank([1e-5, 1e-6]) == 0

    def test_full_rank(self):
        assert numerical_rank([4.0, 3.0, 2.0, 1.0]) == 4

    def test_unsorted_rejected(self):
        with pytest.raises(ConfigError):
            numerical_rank([1.0, 2.0])

    def test_ratio_branch_scale_free(self):
        taus = np.array([8.0, 2.0, 0.004, 0.001])
        base = numerical_rank(taus)
        for c in (0.5, 3.0, 100.0):
            rule = RankRule(abs_threshold=1e-3 * c, ratio_threshold=1e3)
            assert numerical_rank(c * taus, rule) == base

    def test_custom_rule(self):
        assert numerical_rank([1.0, 0.5, 0.1], RankRule(abs_threshold=0.2)) == 2


class TestNullFunction:
    def test_vanishes_at_construction_frequency(self, g1):
        theta_star = 2.0
        Sigma = line_covariance(g1, [theta_star], [1.0])
        eig = hermitian_eig(Sigma)
        U = eig.vectors[:, 1:]  # null space of the rank-1 matrix
        gain = np.linalg.norm(transfer_vector(g1, theta_star)) ** 2
        at_star = null_function(U, g1, theta_star)
        assert at_star <= 1e-9 * gain
        far = null_function(U, g1, theta_star + 1.0)
        assert far > 100 * at_star

    def test_full_space_gives_squared_gain(self, g1):
        rng = np.random.default_rng(1)
        U = random_unitary(rng, g1.n)
        for theta in (0.3, 2.0, 4.4):
            gain = np.linalg.norm(transfer_vector(g1, theta)) ** 2
            assert abs(null_function(U, g1, theta) - gain) < 1e-10 * gain

    def test_empty_null_space_rejected(self, g1):
        with pytest.raises(ConfigError):
            null_function(np.zeros((g1.n, 0)), g1, 1.0)

    def test_basis_invariance(self, g1):
        Sigma = line_covariance(g1, [1.9, 2.1], [1.0, 2.0])
        U = hermitian_eig(Sigma).vectors[:, 2:]
        rng = np.random.default_rng(2)
        Q = random_unitary(rng, U.shape[1])
        for theta in (0.5, 2.0, 3.3):
            a = null_function(U, g1, theta)
            b = null_function(U @ Q, g1, theta)
            assert abs(a - b) < 1e-10 * max(1.0, a)


class TestExtractFrequencies:
    def test_three_lines(self, g1):
        thetas = np.array([1.85, 2.0, 2.2])
        Sigma = line_covariance(g1, thetas, [1.0, 1.0, 1.0])
        spectrum = extract_frequencies(Sigma, g1)
        assert spectrum.count == 3
        assert np.allclose(spectrum.frequencies, thetas, atol=1e-6)

    def test_single_line(self, g1):
        Sigma = line_covariance(g1, [2.0], [1.0])
        spectrum = extract_frequencies(Sigma, g1)
        assert spectrum.count == 1
        assert abs(spectrum.frequencies[0] - 2.0) <= 1e-6

    def test_zero_matrix(self, g1):
        spectrum = extract_frequencies(np.zeros((g1.n, g1.n)), g1)
        assert spectrum.count == 0
        assert spectrum.frequencies.size == 0

    def test_full_rank_rejected(self):
        f = design_filter([PoleSpec(0.0, 0.0, 4)])
        with pytest.raises(FullRankError):
            extract_frequencies(np.eye(4), f)

    def test_deterministic(self, g1):
        Sigma = line_covariance(g1, [1.9, 2.05], [2.0, 0.7])
        a = extract_frequencies(Sigma, g1)
        b = extract_frequencies(Sigma, g1)
        assert np.array_equal(a.frequencies, b.frequencies)


class TestRecoverPowers:
    def test_two_lines(self, g1):
        thetas = [1.9, 2.1]
        Sigma = line_covariance(g1, thetas, [2.0, 1.0])
        powers, clamped = recover_powers(Sigma, g1, thetas)
        assert not clamped
        assert np.allclose(powers, [2.0, 1.0], atol=1e-8)

    def test_single_line(self, g1):
        Sigma = line_covariance(g1, [2.0], [5.0])
        powers, _ = recover_powers(Sigma, g1, [2.0])
        assert abs(powers[0] - 5.0) < 1e-8

    def test_scaling(self, g1):
        thetas = [1.8, 2.2]
        Sigma = line_covariance(g1, thetas, [1.0, 3.0])
        p1, _ = recover_powers(Sigma, g1, thetas)
        p2, _ = recover_powers(4.0 * Sigma, g1, thetas)
        assert np.allclose(p2, 4.0 * p1, rtol=1e-10)

    def test_collinear_dictionary_rejected(self, g1):
        Sigma = line_covariance(g1, [2.0], [1.0])
        with pytest.raises(ConditioningError):
            recover_powers(Sigma, g1, [2.0, 2.0 + 1e-13])

    def test_validation(self, g1):
        with pytest.raises(ConfigError):
            recover_powers(np.eye(g1.n), g1, [])
        with pytest.raises(ConfigError):
            recover_powers(np.eye(g1.n), g1, [1.0, 1.0])


class TestRoundTrip:
    def test_construct_then_invert(self, g1):
        # uniqueness of the decomposition, made operational: ten random
        # instances with 1..3 in-band lines
        rng = np.random.default_rng(14)
        for _ in range(10):
            r = rng.integers(1, 4)
            while True:
                thetas = np.sort(rng.uniform(1.75, 2.25, r))
                if r == 1 or np.diff(thetas).min() > 0.02:
                    break
            powers = rng.uniform(0.5, 5.0, r)
            Sigma = line_covariance(g1, thetas, powers)
            spectrum = extract_frequencies(Sigma, g1)
            assert spectrum.count == r
            assert np.allclose(spectrum.frequencies, thetas, atol=1e-6)
            fitted, clamped = recover_powers(Sigma, g1, spectrum.frequencies)
            assert not clamped
            assert np.allclose(fitted, powers, rtol=1e-6)


class TestEstimateLineSpectrum:
    def test_noiseless_two_cisoids(self, g1, g1_subspace):
        spec = CisoidSpec(amplitudes=[1.0, 1.0 * np.exp(0.9j)], frequencies=[1.9, 2.1])
        y = generate_signal(spec, 117)
        out = apply_filter(g1, y, 1e-3)
        lam = 1e-6 * np.linalg.norm(out.X)
        spectrum = estimate_line_spectrum(out, g1, lam, subspace=g1_subspace)
        assert spectrum.count == 2
        assert np.allclose(spectrum.frequencies, [1.9, 2.1], atol=1e-3)
        assert spectrum.powers is not None and np.all(spectrum.powers > 0)

    def test_zero_input(self, g1, g1_subspace):
        out = apply_filter(g1, np.zeros(117), 1e-3)
        spectrum = estimate_line_spectrum(out, g1, 1.0, subspace=g1_subspace)
        assert spectrum.count == 0

    def test_stage_tagging(self, g1, g1_subspace):
        out = apply_filter(g1, np.ones(117), 1e-3)
        with pytest.raises(EstimationStageError) as err:
            estimate_line_spectrum(out, g1, -1.0, subspace=g1_subspace)
        assert err.value.stage == "sdp_solve"


class TestLineSpectrumType:
    def test_rejects_mismatched_lengths(self):
        with pytest.raises((ConfigError, Exception)):
            LineSpectrum(count=2, frequencies=np.array([1.0]))

    def test_rejects_unsorted(self):
        with pytest.raises(ConfigError):
            LineSpectrum(count=2, frequencies=np.array([2.0, 1.0]))

    def test_rejects_nonpositive_powers(self):
        with pytest.raises(ConfigError):
            LineSpectrum(count=1, frequencies=np.array([1.0]),
                         powers=np.array([0.0]))

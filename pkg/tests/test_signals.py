import numpy as np
import pytest

from linespec.errors import ConfigError
from linespec.signals import (
    CisoidSpec,
    NoiseSpec,
    experiment_frequencies,
    fft_resolution,
    generate_signal,
    snr_to_sigma2,
)


class TestGenerateSignal:
    def test_dc_cisoid(self):
        spec = CisoidSpec(amplitudes=[1.0], frequencies=[0.0])
        assert np.allclose(generate_signal(spec, 3), [1, 1, 1])

    def test_nyquist_alternation(self):
        spec = CisoidSpec(amplitudes=[1.0], frequencies=[np.pi])
        assert np.allclose(generate_signal(spec, 4), [1, -1, 1, -1])

    def test_noise_statistics(self):
        spec = CisoidSpec(amplitudes=[], frequencies=[])
        y = generate_signal(spec, 10**5, NoiseSpec(variance=1.0, seed=123))
        assert abs(np.var(y) - 1.0) < 0.02
        assert abs(np.var(y.real) - 0.5) < 0.02
        assert abs(np.var(y.imag) - 0.5) < 0.02

    def test_seed_determinism(self):
        spec = CisoidSpec(amplitudes=[1.0 + 1j], frequencies=[1.1])
        a = generate_signal(spec, 64, NoiseSpec(variance=0.5, seed=7))
        b = generate_signal(spec, 64, NoiseSpec(variance=0.5, seed=7))
        assert np.array_equal(a, b)
        c = generate_signal(spec, 64, NoiseSpec(variance=0.5, seed=8))
        assert not np.array_equal(a, c)

    def test_noiseless_amplitude_bound(self):
        rng = np.random.default_rng(4)
        amps = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        spec = CisoidSpec(amplitudes=amps, frequencies=[0.5, 1.5, 2.5])
        y = generate_signal(spec, 200)
        assert np.all(np.abs(y) <= np.sum(np.abs(amps)) + 1e-12)

    def test_empirical_snr(self):
        # power ratio of signal to noise must land within 0.5 dB for long L
        L = 10**4
        snr_db = 3.0
        sigma2 = snr_to_sigma2(snr_db, 1.0)
        spec = CisoidSpec(amplitudes=[1.0], frequencies=[1.0])
        clean = generate_signal(spec, L)
        noisy = generate_signal(spec, L, NoiseSpec(variance=sigma2, seed=5))
        noise_power = np.mean(np.abs(noisy - clean) ** 2)
        measured_db = 10 * np.log10(np.mean(np.abs(clean) ** 2) / noise_power)
        assert abs(measured_db - snr_db) < 0.5

    def test_validation(self):
        with pytest.raises(ConfigError):
            CisoidSpec(amplitudes=[1.0, 1.0], frequencies=[1.0, 1.0])
        with pytest.raises(ConfigError):
            CisoidSpec(amplitudes=[1.0], frequencies=[7.0])
        with pytest.raises(ConfigError):
            CisoidSpec(amplitudes=[1.0, 2.0], frequencies=[1.0])
        with pytest.raises(ConfigError):
            NoiseSpec(variance=0.0, seed=1)
        spec = CisoidSpec(amplitudes=[1.0], frequencies=[1.0])
        with pytest.raises(ConfigError):
            generate_signal(spec, 0)


class TestSnrConversion:
    def test_zero_db_unit_amplitude(self):
        assert snr_to_sigma2(0.0, 1.0) == 1.0

    def test_six_db_amplitude_two(self):
        assert abs(snr_to_sigma2(6.0, 2.0) - 4.0 * 10 ** (-0.6)) < 1e-12
        assert abs(snr_to_sigma2(6.0, 2.0) - 1.00475) < 1e-3

    def test_negative_db(self):
        assert abs(snr_to_sigma2(-3.0, 1.0) - 10**0.3) < 1e-12
        assert abs(snr_to_sigma2(-3.0, 1.0) - 1.99526) < 1e-3

    def test_rejects_bad_amplitude(self):
        with pytest.raises(ConfigError):
            snr_to_sigma2(0.0, 0.0)


class TestFftResolution:
    def test_reference_length(self):
        assert abs(fft_resolution(117) - 0.05370) < 1e-4

    def test_exact_formula(self):
        for L in (1, 4, 1000):
            assert fft_resolution(L) == 2 * np.pi / L

    def test_quarter(self):
        assert fft_resolution(4) == np.pi / 2


class TestExperimentFrequencies:
    def test_three_spaced_values(self):
        out = experiment_frequencies(2.0, "three_spaced", 117)
        assert np.allclose(out, [1.8925952, 2.0, 2.1074048], atol=1e-6)

    def test_two_close_separation(self):
        out = experiment_frequencies(2.0, "two_close", 117)
        assert abs((out[1] - out[0]) - 2 * np.pi / 117) < 1e-15

    def test_symmetry_about_center(self):
        out = experiment_frequencies(np.pi, "three_spaced", 64)
        assert abs((out[2] - np.pi) - (np.pi - out[0])) < 1e-12
        assert out[1] == np.pi

    def test_out_of_range_rejected(self):
        with pytest.raises(ConfigError):
            experiment_frequencies(0.01, "three_spaced", 117)
        with pytest.raises(ConfigError):
            experiment_frequencies(0.0, "unknown", 117)

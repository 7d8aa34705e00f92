import numpy as np
import pytest

from slmblank.channel import ChannelParams, awgn_noise, impulsive_noise, transmit
from slmblank.errors import ConfigurationError
from slmblank.experiments import derive_stream


class TestParams:
    def test_paper_settings(self):
        cp = ChannelParams(40.0, -10.0, 0.01)
        assert cp.sigma_w_sq == pytest.approx(1e-4)
        assert cp.sigma_i_sq == pytest.approx(10.0)

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_probability_range(self, p):
        with pytest.raises(ConfigurationError):
            ChannelParams(40, -10, p)


class TestAwgn:
    def test_zero_variance(self, rng):
        assert np.all(awgn_noise(64, 0.0, rng) == 0)

    def test_negative_variance(self, rng):
        with pytest.raises(ConfigurationError):
            awgn_noise(8, -1.0, rng)

    def test_power_and_components(self, rng):
        w = awgn_noise(1_000_000, 1.0, rng)
        assert np.mean(np.abs(w) ** 2) == pytest.approx(2.0, rel=0.01)
        assert np.var(w.real) == pytest.approx(1.0, rel=0.01)
        assert np.var(w.imag) == pytest.approx(1.0, rel=0.01)


class TestImpulsive:
    def test_p_zero(self, rng):
        i, mask = impulsive_noise(64, 0.0, 10.0, rng)
        assert np.all(i == 0) and not mask.any()

    def test_rate_and_conditional_power(self, rng):
        n, p, s2 = 1_000_000, 0.01, 10.0
        i, mask = impulsive_noise(n, p, s2, rng)
        assert abs(mask.sum() - n * p) < 3 * np.sqrt(n * p * (1 - p))
        assert np.all(i[~mask] == 0)
        assert np.mean(np.abs(i[mask]) ** 2) == pytest.approx(2 * s2, rel=0.03)

    def test_bad_probability(self, rng):
        with pytest.raises(ConfigurationError):
            impulsive_noise(8, 1.2, 1.0, rng)


class TestTransmit:
    def test_noiseless(self, rng):
        s = rng.standard_normal(64) + 0j
        real = transmit(s, ChannelParams(np.inf, -10.0, 0.0), rng)
        np.testing.assert_array_equal(real.received, s)

    def test_all_impulses(self, rng):
        s = np.ones(200_000, complex)
        real = transmit(s, ChannelParams(np.inf, -10.0, 1.0), rng)
        d = real.received - s
        assert real.impulse_mask.all()
        assert np.var(d.real) == pytest.approx(10.0, rel=0.01)
        assert np.var(d.imag) == pytest.approx(10.0, rel=0.01)

    def test_decomposition_is_exact(self, rng):
        s = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
        real = transmit(s, ChannelParams(), rng)
        np.testing.assert_array_equal(real.received, s + real.awgn + real.impulses)
        assert np.all(real.impulses[~real.impulse_mask] == 0)

    def test_paper_settings_received_power(self):
        rng = np.random.default_rng(5)
        # Unit-power constant-envelope signal.
        s = np.exp(2j * np.pi * rng.random(1_000_000))
        real = transmit(s, ChannelParams(40.0, -10.0, 0.01), rng)
        expected = 1 + 2e-4 + 0.01 * 20
        assert np.mean(np.abs(real.received) ** 2) == pytest.approx(expected, rel=0.02)

    def test_same_stream_same_realization(self):
        s = np.ones(512, complex)
        a = transmit(s, ChannelParams(), np.random.default_rng(1))
        b = transmit(s, ChannelParams(), np.random.default_rng(1))
        np.testing.assert_array_equal(a.received, b.received)

    def test_disjoint_streams_uncorrelated(self):
        s = np.zeros(100_000, complex)
        a = transmit(s, ChannelParams(0.0, -10.0, 0.5), derive_stream(3, 0, 1), derive_stream(3, 0, 2))
        b = transmit(s, ChannelParams(0.0, -10.0, 0.5), derive_stream(3, 1, 1), derive_stream(3, 1, 2))
        rho = np.corrcoef(a.received.real, b.received.real)[0, 1]
        assert abs(rho) < 0.01

    def test_rejects_non_finite(self, rng):
        with pytest.raises(ConfigurationError):
            transmit(np.array([1.0, np.nan]), ChannelParams(), rng)

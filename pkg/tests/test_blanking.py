import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slmblank.blanking import (
    EnvelopeStats,
    ThresholdSpec,
    blank,
    blank_with_spec,
    envelope_stats,
    estimate_ot,
    threshold_from_stats,
)
from slmblank.channel import ChannelParams, transmit
from slmblank.errors import ConfigurationError, DegenerateThresholdError, InputShapeError
from tests.conftest import random_blocks


def naive_blank(r, t):
    out = []
    for x in r:
        out.append(x if np.abs(x) <= t else 0j)
    return np.array(out, dtype=complex)


def sorted_stats(r):
    mags = sorted(float(np.abs(x)) for x in r)
    n = len(mags)
    median = mags[n // 2] if n % 2 else 0.5 * (mags[n // 2 - 1] + mags[n // 2])
    return mags[-1], sum(mags) / n, median


def paper_received(rng, count):
    s = np.exp(2j * np.pi * rng.random((count, 64)))
    return transmit(s, ChannelParams(40.0, -10.0, 0.01), rng).received


class TestEnvelopeStats:
    def test_constant(self):
        st_ = envelope_stats(np.array([1, -1, 1j, -1j]))
        assert (st_.max, st_.mean, st_.median) == (1, 1, 1)

    def test_direct(self):
        st_ = envelope_stats(np.array([0, 1j, -2, 9]))
        assert (st_.max, st_.mean, st_.median) == (9, 3, 1.5)

    def test_matches_sort_oracle(self, rng):
        for r in random_blocks(rng, 50, 63):
            st_ = envelope_stats(r)
            mx, mean, med = sorted_stats(r)
            assert st_.max == mx
            assert st_.mean == pytest.approx(mean, rel=1e-14)
            assert st_.median == pytest.approx(med, rel=1e-15)
        r = random_blocks(rng, 1)[0]
        assert envelope_stats(r).median == pytest.approx(sorted_stats(r)[2], rel=1e-15)

    def test_empty(self):
        with pytest.raises(InputShapeError):
            envelope_stats(np.array([]))


class TestEstimateOt:
    def test_worked_example(self):
        est = threshold_from_stats(EnvelopeStats(8.0, 1.0, 1.0), 7.0)
        assert (est.ine, est.beta, est.ot) == (7.0, 7.0, 1.0)

    def test_median_equals_mean(self):
        est = threshold_from_stats(EnvelopeStats(5.0, 2.0, 2.0), 3.5)
        assert est.beta == 3.5

    def test_matches_scalar_formula(self, rng):
        received = paper_received(rng, 1000)
        est = estimate_ot(received, 7.0)
        for k, r in enumerate(received):
            a = np.abs(r)
            mx, mean, med = float(a.max()), float(a.mean()), float(np.median(a))
            ot = (mx - mean) / (7.0 - (med - mean))
            assert abs(est.ot[k] - ot) <= 1e-12
        assert np.all(est.ot == est.ine / est.beta)
        assert np.all(est.ine >= 0)

    def test_degenerate_beta(self):
        # median - mean = 1 > gamma
        r = np.array([0, 0, 3, 3, 3], dtype=complex)
        with pytest.raises(DegenerateThresholdError):
            estimate_ot(r, 0.5)

    def test_zero_block_flags(self):
        est = estimate_ot(np.zeros(64), 7.0)
        assert est.ot == 0 and est.ine == 0 and est.zero_threshold is True

    def test_bad_gamma(self):
        with pytest.raises(ConfigurationError):
            estimate_ot(np.ones(4), 0.0)


class TestBlank:
    def test_per_sample(self):
        r = np.array([0.5 + 0j, 2.0j])
        np.testing.assert_array_equal(blank(r, 1.0), [0.5, 0])

    def test_high_threshold_is_identity(self, rng):
        r = random_blocks(rng, 1)[0]
        np.testing.assert_array_equal(blank(r, np.abs(r).max()), r)

    def test_zero_threshold(self):
        r = np.array([0, 1, 0, 2j])
        np.testing.assert_array_equal(blank(r, 0.0), [0, 0, 0, 0])

    def test_boundary_is_kept(self):
        r = np.array([3 + 4j, 5.0000001 + 0j])
        np.testing.assert_array_equal(blank(r, 5.0), [3 + 4j, 0])

    def test_negative_threshold(self):
        with pytest.raises(ConfigurationError):
            blank(np.ones(3), -0.1)

    def test_matches_naive_loop(self, rng):
        for r in random_blocks(rng, 200):
            t = float(np.abs(r[rng.integers(64)]))  # forces a boundary sample
            np.testing.assert_array_equal(blank(r, t), naive_blank(r, t))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 4), t2=st.floats(0, 4),
           c=st.floats(0.01, 100))
    def test_properties(self, seed, t, t2, c):
        r = random_blocks(np.random.default_rng(seed), 1)[0]
        y = blank(r, t)
        np.testing.assert_array_equal(blank(y, t), y)
        assert np.all(np.abs(y) <= t)
        assert np.sum(np.abs(y) ** 2) <= np.sum(np.abs(r) ** 2)
        lo, hi = sorted((t, t2))
        kept_lo = np.abs(r) <= lo
        kept_hi = np.abs(r) <= hi
        assert np.all(kept_hi[kept_lo])
        # Scale equivariance: exact when c is a power of two; otherwise compare survivors.
        scaled = blank(c * r, c * t)
        np.testing.assert_allclose(scaled, c * y, rtol=1e-12, atol=0)

    def test_power_of_two_scaling_exact(self, rng):
        r = random_blocks(rng, 1)[0]
        np.testing.assert_array_equal(blank(4.0 * r, 4.0 * 1.1), 4.0 * blank(r, 1.1))


class TestBlankWithSpec:
    def test_fixed_identity(self, rng):
        r = random_blocks(rng, 1)[0]
        y, t = blank_with_spec(r, ThresholdSpec.fixed(float(np.abs(r).max())))
        np.testing.assert_array_equal(y, r)

    def test_optimized_worked_block(self):
        # Envelope max 8, mean 1, median 1 -> OT = 7 / 7 = 1.
        r = np.array([8, 0, 0, 0, 0, 0, 0, 0, 1, 1j, -1, -1j, 1, 1, 1, 1], dtype=complex)
        est = estimate_ot(r, 7.0)
        assert (est.stats.max, est.stats.mean, est.stats.median) == (8.0, 1.0, 1.0)
        assert est.ot == 1.0
        y, applied = blank_with_spec(r, ThresholdSpec.optimized(7.0))
        assert applied == 1.0
        np.testing.assert_array_equal(y, blank(r, 1.0))
        assert y[0] == 0 and np.all(y[1:] == r[1:])

    def test_optimized_composition(self, rng):
        received = paper_received(rng, 100)
        y, applied = blank_with_spec(received, ThresholdSpec.optimized(7.0))
        for k, r in enumerate(received):
            np.testing.assert_array_equal(y[k], blank(r, estimate_ot(r, 7.0).ot))
            assert applied[k] == estimate_ot(r, 7.0).ot

    @pytest.mark.parametrize("kwargs", [
        dict(mode="fixed", t_fixed=-1.0),
        dict(mode="fixed"),
        dict(mode="optimized", gamma=0.0),
        dict(mode="clip"),
    ])
    def test_invalid_specs(self, kwargs):
        with pytest.raises(ConfigurationError):
            ThresholdSpec(**kwargs)

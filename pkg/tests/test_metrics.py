"""Correlation, spectral efficiency, coherence, and effective-rate metrics."""

import math

import numpy as np
import pytest

from fdd_extrap.channel import CarrierConfig, OfdmChannel
from fdd_extrap.constants import SPEED_OF_LIGHT
from fdd_extrap.metrics import (
    RateContext,
    coherence_block_length,
    coherence_time,
    correlation_factor,
    effective_rate,
    effective_rate_in_context,
    spectral_efficiency,
)

CARRIER = CarrierConfig(f_c=2.9e9, f_s=100e6, k=16, n_bs=4)


def random_matrix(seed, shape=(4, 16)):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestCorrelationFactor:
    def test_identical_channels_score_one(self):
        m = random_matrix(0)
        assert correlation_factor(m, m) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_columns_score_zero(self):
        truth = np.zeros((2, 3), dtype=complex)
        est = np.zeros((2, 3), dtype=complex)
        truth[0, :] = 1.0
        est[1, :] = 1.0
        assert correlation_factor(truth, est) == pytest.approx(0.0, abs=1e-12)

    def test_accepts_ofdm_channel_objects(self):
        m = random_matrix(1)
        chan = OfdmChannel(carrier=CARRIER, matrix=m)
        assert correlation_factor(chan, m) == pytest.approx(1.0, abs=1e-12)

    def test_invariant_to_complex_scaling(self):
        truth = random_matrix(2)
        est = random_matrix(3)
        base = correlation_factor(truth, est)
        rng = np.random.default_rng(11)
        for _ in range(40):
            scale = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            if abs(scale) < 1e-3:
                continue
            assert correlation_factor(truth, scale * est) == pytest.approx(base, abs=1e-9)
            assert correlation_factor(scale * truth, est) == pytest.approx(base, abs=1e-9)

    def test_range_over_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
            b = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
            assert 0.0 <= correlation_factor(a, b) <= 1.0

    def test_zero_columns_are_excluded_with_warning(self):
        truth = random_matrix(4)
        est = truth.copy()
        est[:, 5] = 0.0
        with pytest.warns(UserWarning, match="1 zero subcarrier"):
            value = correlation_factor(truth, est)
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_estimate_is_an_error(self):
        truth = random_matrix(5)
        with pytest.raises(ValueError):
            correlation_factor(truth, np.zeros_like(truth))

    def test_shape_mismatch_is_an_error(self):
        with pytest.raises(ValueError):
            correlation_factor(random_matrix(0, (4, 8)), random_matrix(0, (4, 9)))


class TestSpectralEfficiency:
    def test_perfect_beamforming_hits_the_snr_ceiling(self):
        # Beam along the true channel: rate = mean log2(1 + rho ||h_k||^2).
        truth = random_matrix(0)
        rho = 10.0
        expected = float(np.mean(np.log2(1 + rho * np.linalg.norm(truth, axis=0) ** 2)))
        assert spectral_efficiency(truth, truth, rho) == pytest.approx(expected, abs=1e-12)

    def test_orthogonal_beam_earns_nothing(self):
        truth = np.zeros((2, 4), dtype=complex)
        beam = np.zeros((2, 4), dtype=complex)
        truth[0, :] = 2.0
        beam[1, :] = 1.0
        assert spectral_efficiency(truth, beam, 5.0) == pytest.approx(0.0, abs=1e-12)

    def test_beamformer_scale_does_not_matter(self):
        truth = random_matrix(1)
        beam = random_matrix(2)
        a = spectral_efficiency(truth, beam, 3.0)
        b = spectral_efficiency(truth, 7.5j * beam, 3.0)
        assert a == pytest.approx(b, abs=1e-12)

    def test_zero_beam_column_contributes_zero_rate(self):
        truth = random_matrix(3)
        beam = truth.copy()
        beam[:, 0] = 0.0
        full = spectral_efficiency(truth, truth, 10.0)
        partial = spectral_efficiency(truth, beam, 10.0)
        assert partial < full
        per_col = np.log2(1 + 10.0 * np.linalg.norm(truth, axis=0) ** 2)
        assert partial == pytest.approx(full - per_col[0] / truth.shape[1], abs=1e-9)

    def test_monotone_in_correlation(self):
        truth = np.ones((4, 1), dtype=complex)
        good = np.ones((4, 1), dtype=complex)
        bad = np.array([[1.0], [1.0], [1.0], [-1.0]], dtype=complex)
        assert spectral_efficiency(truth, good, 5.0) > spectral_efficiency(truth, bad, 5.0)

    def test_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            spectral_efficiency(random_matrix(0), random_matrix(1), 0.0)


class TestCoherence:
    def test_coherence_time_formula(self):
        # c / (4 f v) at 2.9 GHz and 10 m/s.
        assert coherence_time(2.9e9, 10.0) == pytest.approx(
            SPEED_OF_LIGHT / (4 * 2.9e9 * 10.0)
        )

    def test_static_terminal_never_decoheres(self):
        assert coherence_time(2.9e9, 0.0) == math.inf

    def test_block_length_is_bandwidth_times_time(self):
        assert coherence_block_length(180e3, 2e-3) == pytest.approx(360.0)

    def test_block_length_accepts_infinite_time(self):
        assert coherence_block_length(180e3, math.inf) == math.inf

    def test_faster_means_shorter(self):
        assert coherence_time(2.9e9, 40.0) < coherence_time(2.9e9, 10.0)


class TestEffectiveRate:
    def test_discounts_by_overhead_fraction(self):
        assert effective_rate(8.0, 90.0, 360.0) == pytest.approx(6.0)

    def test_clamps_at_zero_when_overhead_swallows_the_block(self):
        assert effective_rate(8.0, 500.0, 360.0) == 0.0

    def test_infinite_block_is_penalty_free(self):
        assert effective_rate(8.0, 1e9, math.inf) == pytest.approx(8.0)

    def test_monotone_nonincreasing_in_overhead(self):
        rates = [effective_rate(8.0, ov, 360.0) for ov in (0.0, 36.0, 180.0, 360.0, 720.0)]
        assert all(b <= a for a, b in zip(rates, rates[1:]))
        assert rates[0] == pytest.approx(8.0)

    def test_zero_overhead_keeps_the_rate(self):
        assert effective_rate(5.5, 0.0, 100.0) == pytest.approx(5.5)

    def test_rejects_negative_inputs(self):
        with pytest.raises(ValueError):
            effective_rate(-1.0, 0.0, 100.0)
        with pytest.raises(ValueError):
            effective_rate(1.0, -1.0, 100.0)
        with pytest.raises(ValueError):
            effective_rate(1.0, 0.0, 0.0)


class TestRateContext:
    def test_block_length_combines_coherence_terms(self):
        ctx = RateContext(
            snr_rho=10.0, coherence_bandwidth=180e3, ms_speed=10.0,
            f_c_dl=2.9e9, training_overhead=8.0,
        )
        expected = 180e3 * SPEED_OF_LIGHT / (4 * 2.9e9 * 10.0)
        assert ctx.block_length == pytest.approx(expected)

    def test_effective_rate_in_context_matches_direct_call(self):
        ctx = RateContext(
            snr_rho=10.0, coherence_bandwidth=180e3, ms_speed=10.0,
            f_c_dl=2.9e9, training_overhead=8.0,
        )
        assert effective_rate_in_context(ctx, 4.0) == pytest.approx(
            effective_rate(4.0, 8.0, ctx.block_length)
        )

    def test_static_context_is_penalty_free(self):
        ctx = RateContext(
            snr_rho=10.0, coherence_bandwidth=180e3, ms_speed=0.0,
            f_c_dl=2.9e9, training_overhead=1e6,
        )
        assert effective_rate_in_context(ctx, 4.0) == pytest.approx(4.0)

    def test_validates_fields(self):
        with pytest.raises(ValueError):
            RateContext(snr_rho=0.0, coherence_bandwidth=180e3, ms_speed=0.0,
                        f_c_dl=2.9e9, training_overhead=0.0)
        with pytest.raises(ValueError):
            RateContext(snr_rho=1.0, coherence_bandwidth=180e3, ms_speed=-1.0,
                        f_c_dl=2.9e9, training_overhead=0.0)

import numpy as np
import pytest

from rdlab import (
    RadarConfig,
    Target,
    detect_interfered_samples,
    imat,
    range_doppler_map,
    scenario_preset,
    synthesize_clean_beat,
    synthesize_interference,
    zeroing,
)
from rdlab.mitigation import InterferenceMask
from rdlab.signal_model import BeatFrame


def noise_frame(cfg, rng, sigma=1.0):
    shape = (cfg.samples_per_chirp, cfg.chirps_per_frame)
    return BeatFrame(
        sigma / np.sqrt(2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)),
        cfg, "clean",
    )


class TestDetectInterferedSamples:
    def test_all_zero_frame_empty_mask(self, cfg):
        frame = synthesize_clean_beat(cfg, [], include_noise=False)
        assert detect_interfered_samples(frame).count == 0

    def test_gaussian_false_alarm_fraction(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        mask = detect_interfered_samples(frame, k_sigma=4.0)
        assert mask.count / frame.samples.size <= 0.005

    def test_burst_fully_flagged(self, cfg, rng):
        samples = np.array(noise_frame(cfg, rng).samples)
        samples[12, 40:50] += 20.0  # 10-sample burst at 20x the noise sigma
        mask = detect_interfered_samples(BeatFrame(samples, cfg, "corrupted"))
        assert mask.flags[12, 40:50].all()

    def test_invalid_k_sigma(self, cfg, rng):
        with pytest.raises(ValueError):
            detect_interfered_samples(noise_frame(cfg, rng), k_sigma=0.0)


class TestZeroing:
    def test_empty_mask_identity(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        mask = InterferenceMask(np.zeros(frame.shape, dtype=bool))
        assert np.array_equal(zeroing(frame, mask).samples, frame.samples)

    def test_full_mask_annihilates(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        mask = InterferenceMask(np.ones(frame.shape, dtype=bool))
        assert not np.any(zeroing(frame, mask).samples)

    def test_idempotent(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        flags = rng.random(frame.shape) < 0.1
        mask = InterferenceMask(flags)
        once = zeroing(frame, mask)
        twice = zeroing(once, mask)
        assert np.array_equal(once.samples, twice.samples)

    def test_unmasked_samples_untouched(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        flags = rng.random(frame.shape) < 0.1
        out = zeroing(frame, InterferenceMask(flags))
        assert np.array_equal(out.samples[~flags], frame.samples[~flags])

    def test_shape_mismatch(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        with pytest.raises(ValueError):
            zeroing(frame, InterferenceMask(np.zeros((2, 2), dtype=bool)))

    def test_never_raises_interference_rd_cells(self, cfg, rng):
        # With the mask covering the (bursty) interference support,
        # zeroing can only remove interference energy from the RD map.
        from rdlab import superimpose

        victim, intf_cfg = scenario_preset(2)
        intf = synthesize_interference(victim, intf_cfg)
        corrupted = superimpose(noise_frame(victim, rng, sigma=1e-6), [intf])
        mask = detect_interfered_samples(corrupted)
        assert np.all(mask.flags[intf.samples != 0])
        before = np.abs(range_doppler_map(intf).values)
        after = np.abs(range_doppler_map(zeroing(intf, mask)).values)
        assert np.all(after <= before)


class TestImat:
    def test_empty_mask_identity(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        mask = InterferenceMask(np.zeros(frame.shape, dtype=bool))
        assert np.array_equal(imat(frame, mask).samples, frame.samples)

    def test_masked_sinusoid_reconstruction(self, cfg, rng):
        n = np.arange(cfg.samples_per_chirp)
        tone = np.exp(2j * np.pi * 11 * n / cfg.samples_per_chirp)
        frame = BeatFrame(np.tile(tone[:, None], (1, cfg.chirps_per_frame)), cfg, "clean")
        flags = np.zeros(frame.shape, dtype=bool)
        flags[rng.choice(cfg.samples_per_chirp, size=8, replace=False), :] = True
        recovered = imat(frame, InterferenceMask(flags), iterations=10, decay=0.7)
        err = np.sum(np.abs(recovered.samples - frame.samples) ** 2)
        assert 10 * np.log10(err / np.sum(np.abs(frame.samples) ** 2)) <= -20.0

    def test_two_tone_peaks_preserved(self, cfg, rng):
        n = np.arange(cfg.samples_per_chirp)
        tones = (np.exp(2j * np.pi * 11 * n / 64) + np.exp(2j * np.pi * 37 * n / 64))
        frame = BeatFrame(np.tile(tones[:, None], (1, cfg.chirps_per_frame)), cfg, "clean")
        flags = np.zeros(frame.shape, dtype=bool)
        flags[rng.choice(64, size=8, replace=False), :] = True
        recovered = imat(frame, InterferenceMask(flags))
        spec_in = np.abs(np.fft.fft(frame.samples[:, 0]))
        spec_out = np.abs(np.fft.fft(recovered.samples[:, 0]))
        for peak_bin in (11, 37):
            delta_db = 20 * np.log10(spec_out[peak_bin] / spec_in[peak_bin])
            assert abs(delta_db) <= 1.0

    def test_unmasked_samples_bit_identical(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        flags = rng.random(frame.shape) < 0.2
        out = imat(frame, InterferenceMask(flags))
        assert np.array_equal(out.samples[~flags], frame.samples[~flags])

    def test_hyperparameter_validation(self, cfg, rng):
        frame = noise_frame(cfg, rng)
        mask = InterferenceMask(np.zeros(frame.shape, dtype=bool))
        with pytest.raises(ValueError):
            imat(frame, mask, iterations=0)
        with pytest.raises(ValueError):
            imat(frame, mask, decay=1.0)
        with pytest.raises(ValueError):
            imat(frame, mask, decay=0.0)


class TestMitigationOnInterferedScene:
    def test_both_methods_recover_sinr(self, cfg):
        from rdlab import object_noise_cells, sinr, superimpose, to_magnitude

        target = Target(30.0, 10.0, 10.0)
        clean = synthesize_clean_beat(cfg, [target], noise_seed=7)
        clean_map = range_doppler_map(clean)
        objects, noise_cells = object_noise_cells(to_magnitude(clean_map))
        victim, intf_cfg = scenario_preset(2)
        corrupted = superimpose(clean, [synthesize_interference(victim, intf_cfg)])
        mask = detect_interfered_samples(corrupted)
        s_corr = sinr(range_doppler_map(corrupted), objects, noise_cells)
        s_zero = sinr(range_doppler_map(zeroing(corrupted, mask)), objects, noise_cells)
        s_imat = sinr(range_doppler_map(imat(corrupted, mask)), objects, noise_cells)
        assert s_zero > s_corr
        assert s_imat > s_corr

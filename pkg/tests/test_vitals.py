import numpy as np
import pytest

from oracles import dtft_band_estimate
from support import pilot_frame, rdms_from_dwells
from otfs_jrc import (
    BandSpec,
    C_LIGHT,
    ChannelConfig,
    DimensionMismatchError,
    FrameConfig,
    InsufficientDataError,
    NoSignalError,
    PhaseTrace,
    Rdm,
    SymbolAlphabet,
    TargetSpec,
    ValidationError,
    VitalMotion,
    band_bins,
    band_spectrum,
    bandpass,
    estimate_vitals,
    extract_phase_trace,
    generate_frame,
    noise_power_for_snr_db,
    simulate_dwells,
    trace_from_csv,
    trace_to_csv,
)
from otfs_jrc.vitals import BREATH_BAND, HEART_BAND

DELTA = 0.06


def tone_trace(length, freqs_amps, delta=DELTA):
    t = np.arange(length) * delta
    z = np.zeros(length)
    for f, a in freqs_amps:
        z += a * np.sin(2 * np.pi * f * t)
    return PhaseTrace(z, delta)


class TestPhaseTrace:
    def test_minimum_length(self):
        with pytest.raises(ValidationError):
            PhaseTrace(np.zeros(7), DELTA)

    def test_sample_rate_and_len(self):
        trace = PhaseTrace(np.zeros(64), 0.06)
        assert len(trace) == 64
        assert trace.sample_rate_hz == pytest.approx(1 / 0.06, rel=1e-15)

    def test_band_spec_validation(self):
        with pytest.raises(ValidationError):
            BandSpec(0.7, 0.1)
        with pytest.raises(ValidationError):
            BandSpec(0.0, 0.5)


class TestExtractPhaseTrace:
    def make_rdms(self, config, phases, bin_=(5, 3), mag=2.0):
        rdms = []
        for phi in phases:
            r = np.full((config.m_bins, config.n_bins), 0.01 + 0j)
            r[bin_] = mag * np.exp(1j * phi)
            rdms.append(Rdm(config=config, r=r, si_cancelled=False))
        return rdms

    def test_requires_eight_dwells(self, small_config):
        rdms = self.make_rdms(small_config, np.zeros(7))
        with pytest.raises(InsufficientDataError):
            extract_phase_trace(rdms, dwell_interval_s=DELTA)

    def test_requires_matching_configs(self, small_config, desk_config):
        rdms = self.make_rdms(small_config, np.zeros(8))
        rdms[-1] = self.make_rdms(desk_config, np.zeros(1))[0]
        with pytest.raises(DimensionMismatchError):
            extract_phase_trace(rdms, dwell_interval_s=DELTA)

    def test_track_bin_bounds_checked(self, small_config):
        rdms = self.make_rdms(small_config, np.zeros(8))
        with pytest.raises(ValidationError):
            extract_phase_trace(rdms, track_bin=(16, 0), dwell_interval_s=DELTA)

    def test_defaults_to_first_map_argmax_and_detrends(self, small_config):
        phases = np.linspace(0.0, 1.0, 16)
        rdms = self.make_rdms(small_config, phases, bin_=(9, 2))
        trace = extract_phase_trace(rdms, dwell_interval_s=DELTA)
        assert trace.peak_bin == (9, 2)
        assert trace.phases_rad.mean() == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(trace.phases_rad, phases - phases.mean(), atol=1e-12)
        assert np.allclose(trace.complex_peaks, 2.0 * np.exp(1j * phases), atol=1e-12)

    def test_unwraps_phase_wraps(self, small_config):
        # 8 rad of swing forces raw angles across the +/- pi seam.
        t = np.arange(64) * DELTA
        phases = 8.0 * np.sin(2 * np.pi * 0.25 * t)
        rdms = self.make_rdms(small_config, phases)
        trace = extract_phase_trace(rdms, dwell_interval_s=DELTA)
        assert np.max(np.abs(trace.phases_rad - (phases - phases.mean()))) < 1e-9

    def test_static_target_gives_flat_trace(self, desk_config):
        x = generate_frame(desk_config, SymbolAlphabet.qpsk(), seed=51)
        ch = ChannelConfig(targets=(TargetSpec(gain=1.0, delay_bins=4, doppler_bins=0),))
        rdms = rdms_from_dwells(simulate_dwells(x, ch, 16), x)
        trace = extract_phase_trace(rdms, dwell_interval_s=DELTA)
        assert np.max(np.abs(trace.phases_rad)) < 1e-12

    def test_vitalized_target_matches_closed_form(self, desk_config):
        v = VitalMotion(base_range_m=1.2, breath_rate_hz=0.25, breath_amp_m=0.005, heart_amp_m=0.0)
        ch = ChannelConfig(
            targets=(TargetSpec(gain=1.0, delay_bins=3, doppler_bins=0, vitals=v),),
            dwell_interval_s=DELTA,
        )
        x = generate_frame(desk_config, SymbolAlphabet.qpsk(), seed=52)
        rdms = rdms_from_dwells(simulate_dwells(x, ch, 96), x)
        trace = extract_phase_trace(rdms, track_bin=(3, 0), dwell_interval_s=DELTA)
        t = np.arange(96) * DELTA
        expected = -(4 * np.pi * desk_config.fc_hz / C_LIGHT) * 0.005 * np.sin(
            2 * np.pi * 0.25 * t
        )
        expected -= expected.mean()
        assert np.max(np.abs(trace.phases_rad - expected)) < 1e-6

    def test_gate_follows_a_wandering_peak(self, small_config):
        # Peak alternates between (5, 3) and (6, 3); the fixed-bin track
        # sees a corrupted series, the gated track recovers the ramp.
        phases = np.linspace(-1.0, 1.0, 24)
        rdms = []
        for i, phi in enumerate(phases):
            r = np.full((16, 8), 0.01 + 0j)
            where = (5, 3) if i % 2 == 0 else (6, 3)
            r[where] = 3.0 * np.exp(1j * phi)
            rdms.append(Rdm(config=small_config, r=r, si_cancelled=False))
        gated = extract_phase_trace(rdms, track_bin=(5, 3), dwell_interval_s=DELTA, gate=True)
        assert np.allclose(gated.phases_rad, phases - phases.mean(), atol=1e-12)
        fixed = extract_phase_trace(rdms, track_bin=(5, 3), dwell_interval_s=DELTA)
        assert not np.allclose(fixed.phases_rad, phases - phases.mean(), atol=1e-3)


class TestBandpass:
    def test_on_grid_tone_passes_unchanged(self):
        trace = tone_trace(200, [(0.25, 1.0)])  # bin 3 of 200 exactly
        out = bandpass(trace, BREATH_BAND).phases_rad
        target = trace.phases_rad - trace.phases_rad.mean()
        assert np.sum((out - target) ** 2) < 1e-20 * np.sum(target**2)

    def test_on_grid_tone_is_rejected(self):
        trace = tone_trace(250, [(1.2, 1.0)])  # bin 18 of 250 exactly
        out = bandpass(trace, BREATH_BAND).phases_rad
        zm = trace.phases_rad - trace.phases_rad.mean()
        assert np.sum(out**2) < 1e-20 * np.sum(zm**2)

    def test_two_tone_separation_within_two_percent(self):
        t = np.arange(512) * DELTA
        breath = np.sin(2 * np.pi * 0.25 * t)
        heart = np.sin(2 * np.pi * 1.2 * t)
        trace = PhaseTrace(breath + heart, DELTA)
        br = bandpass(trace, BREATH_BAND).phases_rad
        hb = bandpass(trace, HEART_BAND).phases_rad
        bm = breath - breath.mean()
        hm = heart - heart.mean()
        assert np.sum((br - bm) ** 2) / np.sum(bm**2) < 0.02
        assert np.sum((hb - hm) ** 2) / np.sum(hm**2) < 0.02

    def test_two_tone_separation_exact_on_grid(self):
        t = np.arange(1000) * DELTA  # 0.25 -> bin 15, 1.2 -> bin 72
        breath = np.sin(2 * np.pi * 0.25 * t)
        heart = np.sin(2 * np.pi * 1.2 * t)
        trace = PhaseTrace(breath + heart, DELTA)
        br = bandpass(trace, BREATH_BAND).phases_rad
        bm = breath - breath.mean()
        assert np.sum((br - bm) ** 2) / np.sum(bm**2) < 1e-12

    def test_output_is_real_and_idempotent(self, rng):
        trace = PhaseTrace(rng.standard_normal(128), DELTA)
        once = bandpass(trace, BREATH_BAND)
        twice = bandpass(once, BREATH_BAND)
        assert once.phases_rad.dtype == np.float64
        assert np.max(np.abs(twice.phases_rad - once.phases_rad)) < 1e-12

    def test_band_above_nyquist_rejected(self):
        trace = PhaseTrace(np.zeros(64), 0.3)  # Nyquist 1.67 Hz
        with pytest.raises(ValidationError):
            bandpass(trace, HEART_BAND)


class TestBandBins:
    def test_small_case_by_hand(self):
        bins = band_bins(BandSpec(0.1, 0.7), fft_size=20, dwell_interval_s=0.5)
        # freqs j/10 for j = 0..10; in [0.1, 0.7] inclusive -> 1..7
        assert bins.tolist() == [1, 2, 3, 4, 5, 6, 7]

    def test_band_spectrum_shape(self):
        trace = tone_trace(64, [(0.25, 1.0)])
        freqs, mags = band_spectrum(trace, BREATH_BAND, fft_size=256)
        assert freqs.shape == mags.shape == (129,)
        peak_f = freqs[np.argmax(mags)]
        assert BREATH_BAND.low_hz <= peak_f <= BREATH_BAND.high_hz


class TestEstimateVitals:
    def test_two_tone_matches_independent_spectral_chain(self):
        trace = tone_trace(512, [(0.25, 1.0), (1.2, 0.1)])
        est = estimate_vitals(trace, fft_size=2048)
        # Values pinned by tests/oracles.dtft_band_estimate.
        assert est.breath_peak_bin == 31
        assert est.heart_peak_bin == 148
        assert est.breath_rate_hz == pytest.approx(0.25227864583333337, rel=1e-12)
        assert est.heart_rate_hz == pytest.approx(1.2044270833333335, rel=1e-12)
        assert est.breath_confidence == pytest.approx(0.2413817970612865, rel=1e-9)
        assert est.heart_confidence == pytest.approx(0.21609566415977605, rel=1e-9)
        br_bin, br_rate, br_conf = dtft_band_estimate(
            trace.phases_rad, DELTA, BREATH_BAND.low_hz, BREATH_BAND.high_hz, 2048
        )
        hb_bin, hb_rate, hb_conf = dtft_band_estimate(
            trace.phases_rad, DELTA, HEART_BAND.low_hz, HEART_BAND.high_hz, 2048
        )
        assert (br_bin, hb_bin) == (31, 148)
        assert est.breath_rate_hz == pytest.approx(br_rate, rel=1e-12)
        assert est.heart_rate_hz == pytest.approx(hb_rate, rel=1e-12)
        assert est.breath_confidence == pytest.approx(br_conf, rel=1e-9)
        assert est.heart_confidence == pytest.approx(hb_conf, rel=1e-9)

    def test_rates_within_one_bin(self):
        trace = tone_trace(512, [(0.25, 1.0), (1.2, 0.1)])
        est = estimate_vitals(trace, fft_size=2048)
        one_bin = 1 / (2048 * DELTA)
        assert abs(est.breath_rate_hz - 0.25) <= one_bin
        assert abs(est.heart_rate_hz - 1.2) <= one_bin
        assert est.fft_size == 2048
        assert est.dwell_interval_s == DELTA

    def test_eq_bin_rate_identity(self):
        trace = tone_trace(512, [(0.3, 1.0), (1.1, 0.2)])
        est = estimate_vitals(trace, fft_size=4096)
        assert est.breath_rate_hz == est.breath_peak_bin / (4096 * DELTA)
        assert est.heart_rate_hz == est.heart_peak_bin / (4096 * DELTA)
        freqs_br = est.breath_rate_hz
        assert BREATH_BAND.low_hz <= freqs_br <= BREATH_BAND.high_hz
        assert HEART_BAND.low_hz <= est.heart_rate_hz <= HEART_BAND.high_hz

    def test_resolution_law(self):
        # Noiseless in-band tones at least two native bins from the band
        # edge recover within half a padded bin; doubling L halves it.
        trace = tone_trace(512, [(0.31, 1.0), (1.57, 0.5)])
        for lfft in (1024, 2048, 4096):
            est = estimate_vitals(trace, fft_size=lfft)
            half_bin = 0.5 / (lfft * DELTA)
            assert abs(est.breath_rate_hz - 0.31) <= half_bin, lfft
            assert abs(est.heart_rate_hz - 1.57) <= half_bin, lfft

    def test_zero_padded_bins_coincide_with_native(self):
        trace = tone_trace(512, [(0.25, 1.0), (1.2, 0.3)])  # not on-grid
        est_native = estimate_vitals(trace, fft_size=512)
        est_padded = estimate_vitals(trace, fft_size=2048)
        # A native-grid peak is still a candidate on the padded grid.
        assert est_padded.breath_peak_bin // 4 in (
            est_native.breath_peak_bin - 1,
            est_native.breath_peak_bin,
            est_native.breath_peak_bin + 1,
        )

    def test_scale_invariance(self):
        base = tone_trace(512, [(0.25, 1.0), (1.2, 0.1)])
        scaled = PhaseTrace(7.3 * base.phases_rad, DELTA)
        a = estimate_vitals(base, fft_size=2048)
        b = estimate_vitals(scaled, fft_size=2048)
        assert a.breath_peak_bin == b.breath_peak_bin
        assert a.heart_peak_bin == b.heart_peak_bin
        assert a.breath_confidence == pytest.approx(b.breath_confidence, rel=1e-12)
        assert a.heart_confidence == pytest.approx(b.heart_confidence, rel=1e-12)

    def test_confidences_bounded(self):
        trace = tone_trace(512, [(0.25, 1.0), (1.2, 0.1)])
        est = estimate_vitals(trace, fft_size=2048)
        assert 0.0 < est.breath_confidence <= 1.0
        assert 0.0 < est.heart_confidence <= 1.0

    def test_zero_trace_raises_no_signal(self):
        with pytest.raises(NoSignalError):
            estimate_vitals(PhaseTrace(np.zeros(64), DELTA), fft_size=256)

    def test_validation(self):
        trace = tone_trace(64, [(0.25, 1.0)])
        with pytest.raises(ValidationError):
            estimate_vitals(trace, fft_size=32)
        with pytest.raises(ValidationError):
            estimate_vitals(
                trace, breath_band=BandSpec(0.1, 1.0), heart_band=BandSpec(0.8, 2.5)
            )
        short = PhaseTrace(np.zeros(64), 0.3)
        with pytest.raises(ValidationError):
            estimate_vitals(short, fft_size=128)  # heart band tops Nyquist

    def test_end_to_end_channel_recovery(self, desk_config):
        v = VitalMotion(base_range_m=1.5, breath_rate_hz=0.3, heart_rate_hz=1.3)
        ch = ChannelConfig(
            targets=(TargetSpec(gain=1.0, delay_bins=6, doppler_bins=0, vitals=v),),
            noise_power=noise_power_for_snr_db(10.0),
            dwell_interval_s=DELTA,
            seed=17,
        )
        x = generate_frame(desk_config, SymbolAlphabet.qpsk(), seed=88)
        rdms = rdms_from_dwells(simulate_dwells(x, ch, 512), x)
        trace = extract_phase_trace(rdms, track_bin=(6, 0), dwell_interval_s=DELTA)
        est = estimate_vitals(trace, fft_size=2048)
        one_bin = 1 / (2048 * DELTA)
        assert abs(est.breath_rate_hz - 0.3) <= one_bin
        assert abs(est.heart_rate_hz - 1.3) <= one_bin


class TestTraceCsv:
    def test_round_trip(self, tmp_path, rng):
        phases = np.unwrap(rng.uniform(-np.pi, np.pi, size=48))
        phases -= phases.mean()
        peaks = 2.0 * np.exp(1j * phases)
        trace = PhaseTrace(phases, DELTA, peak_bin=(4, 1), complex_peaks=peaks)
        path = tmp_path / "trace.csv"
        trace_to_csv(trace, path)
        back = trace_from_csv(path, dwell_interval_s=DELTA)
        assert np.array_equal(back.phases_rad, trace.phases_rad)
        assert np.array_equal(back.complex_peaks, peaks)
        assert back.dwell_interval_s == DELTA

    def test_header(self, tmp_path):
        trace = tone_trace(16, [(0.25, 1.0)])
        path = tmp_path / "trace.csv"
        trace_to_csv(trace, path)
        assert path.read_text().splitlines()[0] == "l,phi_rad,re,im"

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValidationError):
            trace_from_csv(path, dwell_interval_s=DELTA)

    def test_no_temp_file_left(self, tmp_path):
        trace_to_csv(tone_trace(16, [(0.25, 1.0)]), tmp_path / "t.csv")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["t.csv"]

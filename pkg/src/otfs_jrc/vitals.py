"""Vital-sign estimation from a sequence of range-Doppler maps.

The complex value of the tracked peak, followed across dwells, carries
the chest displacement in its argument: unwrap it, remove the mean, and
the breathing and heartbeat tones sit in disjoint sub-hertz bands of the
dwell-rate spectrum. Each band is isolated with a zero-phase spectral
mask, zero-padded to a finer grid, and read off at the strongest in-band
bin: f = bin / (fft_size * dwell_interval).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    NoSignalError,
    ValidationError,
)
from .faor import Rdm

MIN_DWELLS = 8


@dataclass(frozen=True)
class BandSpec:
    """A closed frequency band [low_hz, high_hz] used for masking and search."""

    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not (0.0 < self.low_hz < self.high_hz):
            raise ValidationError(
                f"band must satisfy 0 < low < high, got [{self.low_hz}, {self.high_hz}]"
            )


BREATH_BAND = BandSpec(0.1, 0.7)
HEART_BAND = BandSpec(0.8, 2.5)


@dataclass(frozen=True)
class PhaseTrace:
    """Mean-removed unwrapped peak phase across dwells.

    phases_rad[l] is the unwrapped argument of the tracked complex peak at
    dwell l with the mean subtracted; complex_peaks keeps the raw peak
    values when the trace came from maps, and peak_bin records the tracked
    (delay, Doppler) cell.
    """

    phases_rad: np.ndarray
    dwell_interval_s: float
    peak_bin: Optional[tuple] = None
    complex_peaks: Optional[np.ndarray] = None

    def __post_init__(self):
        phases = np.array(self.phases_rad, dtype=np.float64, copy=True)
        if phases.ndim != 1 or phases.size < MIN_DWELLS:
            raise ValidationError(f"phase trace needs >= {MIN_DWELLS} dwells")
        phases.setflags(write=False)
        object.__setattr__(self, "phases_rad", phases)
        if not self.dwell_interval_s > 0:
            raise ValidationError("dwell_interval_s must be positive")
        if self.complex_peaks is not None:
            peaks = np.array(self.complex_peaks, dtype=np.complex128, copy=True)
            if peaks.shape != phases.shape:
                raise ValidationError("complex_peaks must match phases_rad in length")
            peaks.setflags(write=False)
            object.__setattr__(self, "complex_peaks", peaks)

    def __len__(self) -> int:
        return int(self.phases_rad.size)

    @property
    def sample_rate_hz(self) -> float:
        return 1.0 / self.dwell_interval_s

    @classmethod
    def from_phases(cls, phases_rad, dwell_interval_s: float) -> "PhaseTrace":
        """Build a synthetic trace straight from phase samples."""
        return cls(np.asarray(phases_rad, dtype=np.float64), dwell_interval_s)


def extract_phase_trace(
    rdms: Sequence[Rdm],
    track_bin: Optional[tuple] = None,
    *,
    dwell_interval_s: float,
    gate: bool = False,
) -> PhaseTrace:
    """Follow one map cell across dwells and unwrap its phase.

    The tracked bin defaults to the magnitude argmax of the first map.
    With ``gate`` enabled, each dwell re-centres on the strongest cell
    inside the 3x3 toroidal neighbourhood of the locked bin, which rides
    out single-bin peak wander without letting the lock drift.
    """
    rdms = list(rdms)
    if len(rdms) < MIN_DWELLS:
        raise InsufficientDataError(f"need >= {MIN_DWELLS} dwells, got {len(rdms)}")
    config = rdms[0].config
    for r in rdms[1:]:
        if r.config != config:
            raise DimensionMismatchError("all maps must share one frame config")
    if track_bin is None:
        flat = int(np.argmax(np.abs(rdms[0].r)))
        m0, n0 = np.unravel_index(flat, rdms[0].r.shape)
    else:
        m0, n0 = (int(track_bin[0]), int(track_bin[1]))
        if not (0 <= m0 < config.m_bins and 0 <= n0 < config.n_bins):
            raise ValidationError(f"track_bin {track_bin} outside the grid")
    peaks = np.empty(len(rdms), dtype=np.complex128)
    if gate:
        rows = (np.arange(m0 - 1, m0 + 2) % config.m_bins).reshape(-1, 1)
        cols = (np.arange(n0 - 1, n0 + 2) % config.n_bins).reshape(1, -1)
        for i, rdm in enumerate(rdms):
            window = rdm.r[rows, cols]
            wm, wn = np.unravel_index(int(np.argmax(np.abs(window))), window.shape)
            peaks[i] = window[wm, wn]
    else:
        for i, rdm in enumerate(rdms):
            peaks[i] = rdm.r[m0, n0]
    phases = np.unwrap(np.angle(peaks))
    phases -= phases.mean()
    return PhaseTrace(phases, dwell_interval_s, peak_bin=(int(m0), int(n0)), complex_peaks=peaks)


def _check_band_vs_rate(band: BandSpec, trace: PhaseTrace):
    nyquist = 0.5 * trace.sample_rate_hz
    if band.high_hz >= nyquist:
        raise ValidationError(
            f"band top {band.high_hz} Hz reaches Nyquist {nyquist} Hz "
            f"at dwell interval {trace.dwell_interval_s} s"
        )


def bandpass(trace: PhaseTrace, band: BandSpec) -> PhaseTrace:
    """Zero-phase band isolation by spectral masking.

    The mean-removed trace is transformed, every bin whose |frequency|
    falls outside [low, high] is zeroed, and the result transformed back.
    Masking a symmetric band keeps the output real and applying the same
    mask twice changes nothing.
    """
    _check_band_vs_rate(band, trace)
    z = trace.phases_rad - trace.phases_rad.mean()
    spectrum = np.fft.fft(z)
    freqs = np.fft.fftfreq(len(trace), d=trace.dwell_interval_s)
    keep = (np.abs(freqs) >= band.low_hz) & (np.abs(freqs) <= band.high_hz)
    spectrum[~keep] = 0.0
    filtered = np.fft.ifft(spectrum).real
    return PhaseTrace(filtered, trace.dwell_interval_s, peak_bin=trace.peak_bin)


def band_bins(band: BandSpec, fft_size: int, dwell_interval_s: float) -> np.ndarray:
    """Non-negative FFT bin indices whose frequency lies inside the band."""
    bins = np.arange(fft_size // 2 + 1)
    freqs = bins / (fft_size * dwell_interval_s)
    return bins[(freqs >= band.low_hz) & (freqs <= band.high_hz)]


def band_spectrum(trace: PhaseTrace, band: BandSpec, fft_size: int):
    """Magnitude spectrum of the band-filtered trace on the padded grid.

    Returns (freqs, magnitudes) over bins 0 .. fft_size // 2.
    """
    if fft_size < len(trace):
        raise ValidationError("fft_size must be >= trace length")
    filtered = bandpass(trace, band)
    padded = np.zeros(fft_size, dtype=np.float64)
    padded[: len(trace)] = filtered.phases_rad
    spectrum = np.abs(np.fft.fft(padded))[: fft_size // 2 + 1]
    freqs = np.arange(fft_size // 2 + 1) / (fft_size * trace.dwell_interval_s)
    return freqs, spectrum


@dataclass(frozen=True)
class VitalEstimate:
    """Breathing and heartbeat readouts with their spectral provenance."""

    breath_rate_hz: float
    heart_rate_hz: float
    breath_peak_bin: int
    heart_peak_bin: int
    breath_confidence: float
    heart_confidence: float
    fft_size: int
    dwell_interval_s: float


def _band_estimate(trace: PhaseTrace, band: BandSpec, fft_size: int, label: str):
    _, spectrum = band_spectrum(trace, band, fft_size)
    bins = band_bins(band, fft_size, trace.dwell_interval_s)
    if bins.size == 0:
        raise ValidationError(f"{label} band contains no bins at fft_size {fft_size}")
    power = spectrum[bins] ** 2
    total = float(power.sum())
    if total == 0.0:
        raise NoSignalError(f"no {label} signal: in-band spectrum is identically zero")
    best = int(np.argmax(power))
    peak_bin = int(bins[best])
    rate = peak_bin / (fft_size * trace.dwell_interval_s)
    confidence = float(power[best]) / total
    return rate, peak_bin, confidence


def estimate_vitals(
    trace: PhaseTrace,
    breath_band: BandSpec = BREATH_BAND,
    heart_band: BandSpec = HEART_BAND,
    fft_size: int = 2048,
) -> VitalEstimate:
    """Estimate breathing and heartbeat rates from one phase trace.

    Each band is masked out of the trace, zero-padded to ``fft_size``,
    and the strongest in-band bin b gives the rate b / (fft_size * dwell
    interval). Confidence is that bin's share of the in-band power.
    """
    if fft_size < len(trace):
        raise ValidationError("fft_size must be >= trace length")
    if breath_band.high_hz > heart_band.low_hz:
        raise ValidationError("breath and heart bands must be disjoint")
    _check_band_vs_rate(heart_band, trace)
    breath_rate, breath_bin, breath_conf = _band_estimate(trace, breath_band, fft_size, "breathing")
    heart_rate, heart_bin, heart_conf = _band_estimate(trace, heart_band, fft_size, "heartbeat")
    return VitalEstimate(
        breath_rate_hz=breath_rate,
        heart_rate_hz=heart_rate,
        breath_peak_bin=breath_bin,
        heart_peak_bin=heart_bin,
        breath_confidence=breath_conf,
        heart_confidence=heart_conf,
        fft_size=fft_size,
        dwell_interval_s=trace.dwell_interval_s,
    )


def trace_to_csv(trace: PhaseTrace, path) -> None:
    """Write ``l,phi_rad,re,im`` rows; re/im are the tracked complex peaks."""
    if trace.complex_peaks is not None:
        peaks = trace.complex_peaks
    else:
        peaks = np.exp(1j * trace.phases_rad)
    lines = ["l,phi_rad,re,im"]
    for l, (phi, rho) in enumerate(zip(trace.phases_rad, peaks)):
        lines.append(f"{l},{float(phi)!r},{float(rho.real)!r},{float(rho.imag)!r}")
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def trace_from_csv(path, dwell_interval_s: float) -> PhaseTrace:
    """Read a trace written by :func:`trace_to_csv`."""
    phases = []
    peaks = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["l", "phi_rad", "re", "im"]:
            raise ValidationError(f"{path}: unexpected trace CSV header {reader.fieldnames}")
        for row in reader:
            phases.append(float(row["phi_rad"]))
            peaks.append(complex(float(row["re"]), float(row["im"])))
    return PhaseTrace(
        np.asarray(phases),
        dwell_interval_s,
        complex_peaks=np.asarray(peaks),
    )

"""Correlation-based range-Doppler processing and peak detection.

The detector forms the unitary 2D spectra of the received and transmitted
delay-Doppler grids, multiplies one by the conjugate of the other, and
inverse-transforms the product. That equals the 2D circular
cross-correlation of the two grids up to a single global 1/sqrt(MN)
scale, so a target at integer bins (l, k) shows up as a peak at cell
(l, k) of the map.

Because the transmit leak sits at exactly zero delay and zero Doppler,
its spectral product is constant along the first axis; subtracting the
per-column mean over the data rows removes it and zeroes the whole
delay-0 row of the resulting map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainMismatchError, ValidationError
from .grid import C_LIGHT, DDGrid, Domain, FrameConfig


@dataclass(frozen=True)
class SpectralProduct:
    """Elementwise product Yhat * conj(Xhat) plus the rows considered data."""

    config: FrameConfig
    d: np.ndarray
    s_data: tuple
    cancelled: bool = False

    def __post_init__(self):
        d = np.array(self.d, dtype=np.complex128, copy=True)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "s_data", tuple(self.s_data))


@dataclass(frozen=True)
class Rdm:
    """Complex range-Doppler map; cell [m, n] is delay bin m, Doppler bin n."""

    config: FrameConfig
    r: np.ndarray
    si_cancelled: bool = False

    def __post_init__(self):
        r = np.array(self.r, dtype=np.complex128, copy=True)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class Detection:
    """One extracted peak, in both bin and physical units."""

    delay_bin: int
    doppler_bin_signed: int
    range_m: float
    speed_mps: float
    magnitude: float
    peak_value: complex


@dataclass(frozen=True)
class DetectorParams:
    """Knobs for the iterative peak extractor."""

    cancel_si: bool = True
    max_targets: int = 5
    threshold_factor: float = 8.0
    guard_cells: tuple = (2, 2)

    def __post_init__(self):
        if self.max_targets < 1:
            raise ValidationError("max_targets must be >= 1")
        if not self.threshold_factor > 1:
            raise ValidationError("threshold_factor must exceed 1")
        g = tuple(int(v) for v in self.guard_cells)
        if len(g) != 2 or g[0] < 1 or g[1] < 1:
            raise ValidationError("guard_cells must be two widths >= 1")
        object.__setattr__(self, "guard_cells", g)


def _check_same_frame(a: FrameConfig, b: FrameConfig):
    if a != b:
        raise DimensionMismatchError(f"frame configs differ: {a} vs {b}")


def spectral_product(y: DDGrid, x: DDGrid, s_data=None) -> SpectralProduct:
    """Form D = Yhat * conj(Xhat) from two delay-Doppler grids.

    ``s_data`` lists the first-axis indices treated as data rows for the
    later self-interference average; by default every row counts.
    """
    if y.domain is not Domain.DELAY_DOPPLER or x.domain is not Domain.DELAY_DOPPLER:
        raise DomainMismatchError("spectral_product expects DELAY_DOPPLER grids")
    _check_same_frame(y.config, x.config)
    m_bins = y.config.m_bins
    if s_data is None:
        s_data = range(m_bins)
    rows = tuple(int(a) for a in s_data)
    if len(rows) == 0:
        raise ValidationError("s_data must not be empty")
    if len(set(rows)) != len(rows) or min(rows) < 0 or max(rows) >= m_bins:
        raise ValidationError(f"s_data must be distinct rows in [0, {m_bins})")
    y_hat = np.fft.fft2(y.cells, norm="ortho")
    x_hat = np.fft.fft2(x.cells, norm="ortho")
    return SpectralProduct(y.config, y_hat * np.conj(x_hat), rows)


def cancel_self_interference(sp: SpectralProduct) -> SpectralProduct:
    """Subtract the per-column mean over data rows from every row.

    The zero-delay zero-Doppler leak contributes identically to each row
    of D, so the averaged estimate removes it; afterwards the data rows
    of every column sum to zero, which makes the operation idempotent.
    """
    rows = np.asarray(sp.s_data, dtype=np.intp)
    col_mean = sp.d[rows, :].mean(axis=0)
    return SpectralProduct(sp.config, sp.d - col_mean[None, :], sp.s_data, cancelled=True)


def compute_rdm(sp: SpectralProduct) -> Rdm:
    """Unitary inverse 2D DFT of the spectral product."""
    return Rdm(sp.config, np.fft.ifft2(sp.d, norm="ortho"), si_cancelled=sp.cancelled)


def signed_doppler_bin(n: int, n_bins: int) -> int:
    """Map a raw Doppler index onto the signed range [-N/2, N/2)."""
    return n - n_bins if n >= (n_bins + 1) // 2 else n


def bins_to_physical(delay_bin: int, doppler_bin_signed: int, config: FrameConfig):
    """Convert integer bins to (range in metres, radial speed in m/s)."""
    m_bins, n_bins = config.m_bins, config.n_bins
    if not (0 <= delay_bin < m_bins):
        raise ValidationError(f"delay_bin {delay_bin} outside [0, {m_bins})")
    if not (-n_bins / 2 <= doppler_bin_signed < n_bins / 2):
        raise ValidationError(
            f"doppler_bin_signed {doppler_bin_signed} outside [-{n_bins/2}, {n_bins/2})"
        )
    range_m = delay_bin * C_LIGHT / (2.0 * m_bins * config.scs_hz)
    speed_mps = doppler_bin_signed * C_LIGHT * config.scs_hz / (2.0 * n_bins * config.fc_hz)
    return range_m, speed_mps


def detect(y: DDGrid, x: DDGrid, params: DetectorParams = DetectorParams(), s_data=None) -> list:
    """Full pipeline: spectral product, optional cancellation, map, peaks.

    Peaks are pulled greedily: take the largest remaining cell, report it
    if it clears threshold_factor times the median magnitude of the
    original map, zero its toroidal guard neighbourhood, and repeat up to
    max_targets times. Ties go to the lexicographically smallest (m, n).
    An empty list is a valid outcome.
    """
    sp = spectral_product(y, x, s_data=s_data)
    if params.cancel_si:
        sp = cancel_self_interference(sp)
    rdm = compute_rdm(sp)
    return extract_peaks(rdm, params)


def extract_peaks(rdm: Rdm, params: DetectorParams = DetectorParams()) -> list:
    """Iterative argmax-and-mask peak extraction on an existing map."""
    config = rdm.config
    m_bins, n_bins = config.m_bins, config.n_bins
    mag = np.abs(rdm.r)
    threshold = params.threshold_factor * float(np.median(mag))
    work = mag.copy()
    g_m, g_n = params.guard_cells
    detections = []
    while len(detections) < params.max_targets:
        flat = int(np.argmax(work))
        m, n = np.unravel_index(flat, work.shape)
        value = float(work[m, n])
        if not value > threshold:
            break
        k_signed = signed_doppler_bin(int(n), n_bins)
        range_m, speed_mps = bins_to_physical(int(m), k_signed, config)
        detections.append(
            Detection(
                delay_bin=int(m),
                doppler_bin_signed=k_signed,
                range_m=range_m,
                speed_mps=speed_mps,
                magnitude=value,
                peak_value=complex(rdm.r[m, n]),
            )
        )
        rows = np.arange(m - g_m, m + g_m + 1) % m_bins
        cols = np.arange(n - g_n, n + g_n + 1) % n_bins
        work[np.ix_(rows, cols)] = 0.0
    return detections

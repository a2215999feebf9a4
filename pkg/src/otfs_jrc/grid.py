"""Delay-Doppler frame grids and the transforms between signal domains.

A frame is an M x N complex grid: M delay bins (one per subcarrier of
spacing scs_hz) and N Doppler bins (one per time symbol). Moving between
the delay-Doppler and delay-time domains is a unitary per-row (I)FFT along
the Doppler axis, so energy is preserved exactly and the two transforms
are mutual inverses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, DomainMismatchError, ValidationError

C_LIGHT = 299_792_458.0


class Domain(Enum):
    """Tag for which domain a grid's cells currently live in."""

    DELAY_DOPPLER = 0
    DELAY_TIME = 1


@dataclass(frozen=True)
class FrameConfig:
    """Static geometry of one OTFS frame.

    Attributes
    ----------
    m_bins : int
        Number of delay bins / subcarriers (M).
    n_bins : int
        Number of Doppler bins / time symbols (N).
    scs_hz : float
        Subcarrier spacing in Hz.
    fc_hz : float
        Carrier frequency in Hz.
    """

    m_bins: int
    n_bins: int
    scs_hz: float
    fc_hz: float

    def __post_init__(self):
        if not (isinstance(self.m_bins, int) and self.m_bins >= 2):
            raise ValidationError(f"m_bins must be an integer >= 2, got {self.m_bins!r}")
        if not (isinstance(self.n_bins, int) and self.n_bins >= 2):
            raise ValidationError(f"n_bins must be an integer >= 2, got {self.n_bins!r}")
        if not self.scs_hz > 0:
            raise ValidationError(f"scs_hz must be positive, got {self.scs_hz!r}")
        if not self.fc_hz > 0:
            raise ValidationError(f"fc_hz must be positive, got {self.fc_hz!r}")

    @property
    def sample_rate_hz(self) -> float:
        """Serialized sample rate M * scs."""
        return self.m_bins * self.scs_hz

    @property
    def sample_period_s(self) -> float:
        """Duration of one delay bin, 1 / (M * scs)."""
        return 1.0 / (self.m_bins * self.scs_hz)

    @property
    def symbol_time_s(self) -> float:
        """Duration of one time symbol, 1 / scs."""
        return 1.0 / self.scs_hz

    @property
    def frame_time_s(self) -> float:
        """Duration of the whole frame, N / scs."""
        return self.n_bins / self.scs_hz


class Resolutions(NamedTuple):
    delay_res_s: float
    doppler_res_hz: float
    range_res_m: float
    speed_res_mps: float


def resolutions(config: FrameConfig) -> Resolutions:
    """Closed-form bin resolutions of a frame.

    Delay bins are 1/(M*scs) seconds wide and Doppler bins 1/(N*T) Hz wide
    with T = 1/scs; the range and speed figures are the monostatic
    round-trip equivalents at the configured carrier.
    """
    delay_res = 1.0 / (config.m_bins * config.scs_hz)
    doppler_res = 1.0 / (config.n_bins * config.symbol_time_s)
    range_res = C_LIGHT * delay_res / 2.0
    speed_res = C_LIGHT * config.scs_hz / (2.0 * config.n_bins * config.fc_hz)
    return Resolutions(delay_res, doppler_res, range_res, speed_res)


@dataclass(frozen=True)
class DDGrid:
    """An M x N complex frame with a domain tag.

    Cells are stored as a read-only complex128 array indexed [m, n]
    (delay bin, Doppler or time-symbol bin). Instances are immutable;
    operations return new grids.
    """

    config: FrameConfig
    cells: np.ndarray
    domain: Domain = Domain.DELAY_DOPPLER

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.complex128, copy=True)
        if cells.shape != (self.config.m_bins, self.config.n_bins):
            raise DimensionMismatchError(
                f"cells shape {cells.shape} does not match frame "
                f"({self.config.m_bins}, {self.config.n_bins})"
            )
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        if not isinstance(self.domain, Domain):
            raise ValidationError(f"domain must be a Domain, got {self.domain!r}")

    def energy(self) -> float:
        """Total |cell|^2 over the grid."""
        return float(np.sum(np.abs(self.cells) ** 2))


def modulate(grid: DDGrid) -> DDGrid:
    """Transform a delay-Doppler grid to the delay-time domain.

    Each row (fixed delay bin m) gets a unitary inverse DFT along the
    Doppler axis, i.e. a 1/sqrt(N)-scaled IFFT.
    """
    if grid.domain is not Domain.DELAY_DOPPLER:
        raise DomainMismatchError("modulate expects a DELAY_DOPPLER grid")
    cells = np.fft.ifft(grid.cells, axis=1, norm="ortho")
    return DDGrid(grid.config, cells, Domain.DELAY_TIME)


def demodulate(grid: DDGrid) -> DDGrid:
    """Inverse of :func:`modulate`: unitary per-row forward DFT."""
    if grid.domain is not Domain.DELAY_TIME:
        raise DomainMismatchError("demodulate expects a DELAY_TIME grid")
    cells = np.fft.fft(grid.cells, axis=1, norm="ortho")
    return DDGrid(grid.config, cells, Domain.DELAY_DOPPLER)


class AlphabetKind(Enum):
    QPSK = "QPSK"
    UNIT_IMPULSE = "UNIT_IMPULSE"
    CUSTOM = "CUSTOM"


# Axis-aligned QPSK keeps |point| == 1.0 exact in binary floating point.
_QPSK_POINTS = np.array([1 + 0j, 0 + 1j, -1 + 0j, 0 - 1j])


@dataclass(frozen=True)
class SymbolAlphabet:
    """Constellation used to fill data frames."""

    kind: AlphabetKind
    points: np.ndarray = field(default_factory=lambda: _QPSK_POINTS.copy())

    def __post_init__(self):
        points = np.atleast_1d(np.array(self.points, dtype=np.complex128))
        if self.kind is AlphabetKind.CUSTOM and points.size == 0:
            raise ValidationError("CUSTOM alphabet needs at least one point")
        if self.kind is AlphabetKind.QPSK:
            points = _QPSK_POINTS.copy()
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def qpsk(cls) -> "SymbolAlphabet":
        return cls(AlphabetKind.QPSK)

    @classmethod
    def unit_impulse(cls) -> "SymbolAlphabet":
        return cls(AlphabetKind.UNIT_IMPULSE, np.array([1 + 0j]))

    @classmethod
    def custom(cls, points) -> "SymbolAlphabet":
        return cls(AlphabetKind.CUSTOM, np.asarray(points, dtype=np.complex128))


def generate_frame(config: FrameConfig, alphabet: SymbolAlphabet, seed: int) -> DDGrid:
    """Fill a delay-Doppler frame from the alphabet, seeded.

    UNIT_IMPULSE puts a single 1 at cell (0, 0) and zeros elsewhere; data
    alphabets draw cells i.i.d. uniform over the constellation points.
    The same seed always produces the same frame.
    """
    m, n = config.m_bins, config.n_bins
    if alphabet.kind is AlphabetKind.UNIT_IMPULSE:
        cells = np.zeros((m, n), dtype=np.complex128)
        cells[0, 0] = 1.0
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, alphabet.points.size, size=(m, n))
        cells = alphabet.points[idx]
    return DDGrid(config, cells, Domain.DELAY_DOPPLER)

"""Target channels applied to OTFS frames.

Two models of the same physics:

* ``apply_dd_channel`` works directly on the delay-Doppler grid. Each
  target circularly shifts the frame by its integer (delay, Doppler) bins,
  applies the per-cell Doppler phase progression, and applies a boundary
  factor to the rows that wrap past the frame start.
* ``apply_dt_channel`` works on the serialized delay-time stream and
  supports fractional delay and Doppler. For integer bins its output,
  demodulated, matches the grid model on every row at or past the target
  delay; rows before it differ because the grid model approximates the
  frame-edge wrap there.

Targets may carry a vital-sign micro-motion. The chest displacement only
matters through the carrier phase, so within one dwell it is held constant
and each dwell l sees an effective gain h * exp(-j 4 pi fc (r + x(l*dt))/c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainMismatchError, ValidationError
from .grid import C_LIGHT, DDGrid, Domain, FrameConfig

_BIN_TOL = 1e-9


@dataclass(frozen=True)
class VitalMotion:
    """Two-tone chest displacement: breathing plus heartbeat.

    x(t) = breath_amp * sin(2 pi breath_rate t + breath_phase)
         + heart_amp  * sin(2 pi heart_rate  t + heart_phase)

    Amplitudes are metres; rates are Hz and must stay in the physiological
    window (0, 5); amplitudes are capped at 5 cm.
    """

    base_range_m: float
    breath_rate_hz: float
    breath_amp_m: float = 0.005
    heart_rate_hz: float = 1.2
    heart_amp_m: float = 0.0003
    breath_phase_rad: float = 0.0
    heart_phase_rad: float = 0.0

    def __post_init__(self):
        if self.base_range_m < 0:
            raise ValidationError("base_range_m must be non-negative")
        for name in ("breath_rate_hz", "heart_rate_hz"):
            rate = getattr(self, name)
            if not (0.0 < rate < 5.0):
                raise ValidationError(f"{name} must lie in (0, 5) Hz, got {rate!r}")
        for name in ("breath_amp_m", "heart_amp_m"):
            amp = getattr(self, name)
            if not (0.0 <= amp <= 0.05):
                raise ValidationError(f"{name} must lie in [0, 0.05] m, got {amp!r}")

    def displacement(self, t: float):
        """Chest displacement in metres at time t (seconds); accepts arrays."""
        t = np.asarray(t, dtype=np.float64)
        breath = self.breath_amp_m * np.sin(
            2.0 * np.pi * self.breath_rate_hz * t + self.breath_phase_rad
        )
        heart = self.heart_amp_m * np.sin(
            2.0 * np.pi * self.heart_rate_hz * t + self.heart_phase_rad
        )
        return breath + heart


@dataclass(frozen=True)
class TargetSpec:
    """One propagation path: complex gain, delay/Doppler bins, optional vitals."""

    gain: complex
    delay_bins: float
    doppler_bins: float
    vitals: Optional[VitalMotion] = None
    is_self_interference: bool = False

    def __post_init__(self):
        if abs(self.gain) == 0.0:
            raise ValidationError("target gain must be nonzero")
        if self.delay_bins < 0:
            raise ValidationError("delay_bins must be non-negative")
        if self.is_self_interference and (self.delay_bins != 0 or self.doppler_bins != 0):
            raise ValidationError("self-interference must sit at delay 0, Doppler 0")


@dataclass(frozen=True)
class ChannelConfig:
    """Targets plus the noise and dwell timing they share."""

    targets: tuple
    noise_power: float = 0.0
    dwell_interval_s: float = 0.06
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        for t in self.targets:
            if not isinstance(t, TargetSpec):
                raise ValidationError(f"targets must be TargetSpec, got {type(t)!r}")
        if self.noise_power < 0:
            raise ValidationError("noise_power must be non-negative")
        if not self.dwell_interval_s > 0:
            raise ValidationError("dwell_interval_s must be positive")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ValidationError("seed must be a non-negative integer")


def self_interference_target(targets, si_over_target_db: float = 30.0) -> TargetSpec:
    """Build the transmit-leak path: zero delay/Doppler, gain a fixed number
    of dB above the strongest real target."""
    real = [t for t in targets if not t.is_self_interference]
    if not real:
        raise ValidationError("need at least one real target to scale against")
    strongest = max(abs(t.gain) for t in real)
    gain = strongest * 10.0 ** (si_over_target_db / 20.0)
    return TargetSpec(gain=gain, delay_bins=0, doppler_bins=0, is_self_interference=True)


def noise_power_for_snr_db(snr_db: float, signal_power: float = 1.0) -> float:
    """Per-cell noise power that puts a unit-gain target at the given SNR."""
    return signal_power * 10.0 ** (-snr_db / 10.0)


def effective_gain(target: TargetSpec, fc_hz: float, t: float) -> complex:
    """Target gain at time t, including the vital-sign carrier phase."""
    if target.vitals is None:
        return complex(target.gain)
    motion = target.vitals
    path = motion.base_range_m + float(motion.displacement(t))
    phase = -4.0 * math.pi * fc_hz * path / C_LIGHT
    return complex(target.gain) * complex(math.cos(phase), math.sin(phase))


def _dwell_rng(seed: int, dwell_index: int) -> np.random.Generator:
    # dwell l gets its own stream derived from (seed, l)
    return np.random.default_rng(np.random.SeedSequence((seed, dwell_index)))


def _draw_noise(rng: np.random.Generator, shape, power: float) -> np.ndarray:
    scale = math.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _integer_bin(value: float, name: str) -> int:
    nearest = round(value)
    if abs(value - nearest) > _BIN_TOL:
        raise ValidationError(
            f"{name}={value!r} is not an integer bin; use apply_dt_channel "
            "for fractional delay or Doppler"
        )
    return int(nearest)


def target_pattern(config: FrameConfig, x_cells: np.ndarray, delay_bins: int, doppler_bins: float) -> np.ndarray:
    """Unit-gain single-target response on the delay-Doppler grid.

    Returns phase(m) * boundary(m, n) * X(<m - l>_M, <n - k>_N) where
    phase(m) = exp(j 2 pi ((m - l)/M) (k/N)) uses the signed Doppler value
    (so negative bins shift the peak the physical way) and the boundary
    factor ((N-1)/N) exp(-j 2 pi (n - k)/N) applies to rows m < l that
    wrap past the frame start.
    """
    m_bins, n_bins = config.m_bins, config.n_bins
    l = delay_bins
    k = doppler_bins
    if not (0 <= l <= m_bins - 1):
        raise ValidationError(f"delay_bins={l} outside [0, {m_bins - 1}]")
    k_shift = _integer_bin(k, "doppler_bins") % n_bins
    shifted = np.roll(x_cells, (l, k_shift), axis=(0, 1))
    m_idx = np.arange(m_bins).reshape(-1, 1)
    phase = np.exp(2j * np.pi * ((m_idx - l) / m_bins) * (k / n_bins))
    pattern = phase * shifted
    if l > 0:
        n_idx = np.arange(n_bins).reshape(1, -1)
        boundary = ((n_bins - 1) / n_bins) * np.exp(-2j * np.pi * (n_idx - k) / n_bins)
        pattern[:l, :] = pattern[:l, :] * boundary
    return pattern


def apply_dd_channel(x: DDGrid, cfg: ChannelConfig, dwell_index: int = 0) -> DDGrid:
    """Run the grid-domain channel over a delay-Doppler frame.

    Every target needs integer delay and Doppler bins here (the circular
    shift is exact only on the grid); fractional values are rejected with
    a pointer at the delay-time model. Noise is circularly symmetric
    complex Gaussian with per-cell power ``noise_power``, drawn from a
    stream derived from (cfg.seed, dwell_index).
    """
    if x.domain is not Domain.DELAY_DOPPLER:
        raise DomainMismatchError("apply_dd_channel expects a DELAY_DOPPLER grid")
    config = x.config
    out = np.zeros((config.m_bins, config.n_bins), dtype=np.complex128)
    t_dwell = dwell_index * cfg.dwell_interval_s
    for target in cfg.targets:
        l = _integer_bin(target.delay_bins, "delay_bins")
        _integer_bin(target.doppler_bins, "doppler_bins")
        h_eff = effective_gain(target, config.fc_hz, t_dwell)
        out += h_eff * target_pattern(config, x.cells, l, target.doppler_bins)
    if cfg.noise_power > 0:
        rng = _dwell_rng(cfg.seed, dwell_index)
        out += _draw_noise(rng, out.shape, cfg.noise_power)
    return DDGrid(config, out, Domain.DELAY_DOPPLER)


def apply_dt_channel(x: DDGrid, cfg: ChannelConfig, dwell_index: int = 0) -> DDGrid:
    """Run the serialized delay-time channel; bins may be fractional.

    The grid is serialized column by column (time symbol outer, delay
    sample inner) into a stream at rate M * scs. Each target applies a
    circular fractional delay of delay_bins samples via a linear phase in
    the DFT domain, then the Doppler ramp exp(j 2 pi f_p (t - tau)) with
    f_p = doppler_bins * scs / N, referenced to the delayed wavefront so
    integer-bin targets land exactly where the grid model puts them.
    """
    if x.domain is not Domain.DELAY_TIME:
        raise DomainMismatchError("apply_dt_channel expects a DELAY_TIME grid")
    config = x.config
    m_bins, n_bins = config.m_bins, config.n_bins
    total = m_bins * n_bins
    ts = config.sample_period_s
    stream = x.cells.T.ravel()
    spectrum = np.fft.fft(stream)
    freqs = np.fft.fftfreq(total, d=ts)
    t = np.arange(total) * ts
    out = np.zeros(total, dtype=np.complex128)
    t_dwell = dwell_index * cfg.dwell_interval_s
    for target in cfg.targets:
        if not (0 <= target.delay_bins <= m_bins - 1):
            raise ValidationError(
                f"delay_bins={target.delay_bins} outside [0, {m_bins - 1}]"
            )
        tau = target.delay_bins * ts
        delayed = np.fft.ifft(spectrum * np.exp(-2j * np.pi * freqs * tau))
        f_p = target.doppler_bins * config.scs_hz / n_bins
        ramp = np.exp(2j * np.pi * f_p * (t - tau))
        h_eff = effective_gain(target, config.fc_hz, t_dwell)
        out += h_eff * delayed * ramp
    cells = out.reshape(n_bins, m_bins).T
    if cfg.noise_power > 0:
        rng = _dwell_rng(cfg.seed, dwell_index)
        cells = cells + _draw_noise(rng, cells.shape, cfg.noise_power)
    return DDGrid(config, cells, Domain.DELAY_TIME)


def simulate_dwells(x: DDGrid, cfg: ChannelConfig, num_dwells: int) -> list:
    """Apply the channel once per dwell and collect the received grids.

    Dwell l is taken at time l * dwell_interval_s, so vitalized targets
    advance their chest displacement between dwells while everything else
    stays put. The domain tag of ``x`` picks the model.
    """
    if num_dwells < 1:
        raise ValidationError("num_dwells must be >= 1")
    apply = apply_dd_channel if x.domain is Domain.DELAY_DOPPLER else apply_dt_channel
    return [apply(x, cfg, dwell_index=l) for l in range(num_dwells)]


def _vitals_to_dict(v: Optional[VitalMotion]):
    if v is None:
        return None
    return {
        "base_range_m": v.base_range_m,
        "breath_rate_hz": v.breath_rate_hz,
        "breath_amp_m": v.breath_amp_m,
        "heart_rate_hz": v.heart_rate_hz,
        "heart_amp_m": v.heart_amp_m,
        "breath_phase_rad": v.breath_phase_rad,
        "heart_phase_rad": v.heart_phase_rad,
    }


def _vitals_from_dict(d) -> Optional[VitalMotion]:
    if d is None:
        return None
    return VitalMotion(**d)


def channel_config_to_dict(cfg: ChannelConfig) -> dict:
    """JSON-ready view of a channel configuration."""
    return {
        "targets": [
            {
                "gain_re": float(np.real(t.gain)),
                "gain_im": float(np.imag(t.gain)),
                "delay_bins": t.delay_bins,
                "doppler_bins": t.doppler_bins,
                "is_self_interference": t.is_self_interference,
                "vitals": _vitals_to_dict(t.vitals),
            }
            for t in cfg.targets
        ],
        "noise_power": cfg.noise_power,
        "dwell_interval_s": cfg.dwell_interval_s,
        "seed": cfg.seed,
    }


def channel_config_from_dict(data: dict) -> ChannelConfig:
    """Parse the JSON form produced by :func:`channel_config_to_dict`."""
    try:
        targets = tuple(
            TargetSpec(
                gain=complex(entry["gain_re"], entry["gain_im"]),
                delay_bins=entry["delay_bins"],
                doppler_bins=entry["doppler_bins"],
                vitals=_vitals_from_dict(entry.get("vitals")),
                is_self_interference=entry.get("is_self_interference", False),
            )
            for entry in data["targets"]
        )
        return ChannelConfig(
            targets=targets,
            noise_power=data.get("noise_power", 0.0),
            dwell_interval_s=data.get("dwell_interval_s", 0.06),
            seed=data.get("seed", 0),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed channel config: {exc}") from exc

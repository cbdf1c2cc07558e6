"""FMCW chirp-sequence synthesis at the victim ADC output.

Produces the discrete beat-frame matrix for point-target echoes, receiver
thermal noise and mutual interference from an aggressor FMCW radar.  The
victim transmits M chirps of slope B_sw/T_c every T_r seconds and samples
N points per chirp at f_s after dechirping; the aggressor runs a
free-running back-to-back sawtooth offset by a fixed time delay.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence, Tuple

import numpy as np

from . import link_budget
from .units import SPEED_OF_LIGHT, dbm_to_amplitude, dbm_to_watts

PROVENANCE_TAGS = ("clean", "interference-only", "corrupted")


def seeded_rng(*key) -> np.random.Generator:
    """Counter-based substream keyed by an arbitrary tuple.

    Streams for different keys are statistically independent and do not
    depend on generation order, so frames can be synthesized in parallel.
    Strings in the key are hashed to integers first.
    """
    entropy = []
    for part in key:
        if isinstance(part, str):
            entropy.append(int.from_bytes(part.encode("utf-8"), "little") % (2**64))
        else:
            entropy.append(int(part) & (2**128 - 1))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(*key) -> int:
    """Stable 64-bit seed derived from an arbitrary key tuple."""
    import hashlib

    blob = repr(key).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


@dataclass(frozen=True)
class RadarConfig:
    """Victim radar waveform, sampling, FFT and RF-gain parameters."""

    carrier_freq_hz: float = 77.0e9
    sweep_bandwidth_hz: float = 153.6e6
    sweep_duration_s: float = 21.12e-6
    chirp_repetition_s: float = 42.24e-6
    sampling_freq_hz: float = 12.5e6
    samples_per_chirp: int = 64
    chirps_per_frame: int = 128
    range_fft_points: int = 64
    doppler_fft_points: int = 128
    transmit_power_dbm: float = 5.0
    tx_gain_db: float = 36.0
    rx_gain_db: float = 42.0
    noise_figure_db: float = 4.5
    initial_phase_rad: float = 0.0

    def __post_init__(self):
        for name in ("carrier_freq_hz", "sweep_bandwidth_hz", "sweep_duration_s",
                     "chirp_repetition_s", "sampling_freq_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("samples_per_chirp", "chirps_per_frame",
                     "range_fft_points", "doppler_fft_points"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.samples_per_chirp / self.sampling_freq_hz > self.sweep_duration_s + 1e-15:
            raise ValueError("ADC window N/f_s must fit inside the sweep duration")
        if self.sweep_duration_s > self.chirp_repetition_s + 1e-15:
            raise ValueError("chirp repetition interval must cover the sweep duration")
        if self.range_fft_points < self.samples_per_chirp:
            raise ValueError("range FFT size must be >= samples per chirp")
        if self.doppler_fft_points < self.chirps_per_frame:
            raise ValueError("Doppler FFT size must be >= chirps per frame")

    @property
    def chirp_rate(self) -> float:
        """Sweep slope B_sw / T_c [Hz/s]."""
        return self.sweep_bandwidth_hz / self.sweep_duration_s

    @property
    def sample_period_s(self) -> float:
        return 1.0 / self.sampling_freq_hz

    @property
    def trx_gain_db(self) -> float:
        """Combined transmit + receive antenna gain."""
        return self.tx_gain_db + self.rx_gain_db

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def unambiguous_velocity_mps(self) -> float:
        """Largest |v| mapped without Doppler aliasing: lambda / (4 T_r)."""
        return self.wavelength_m / (4.0 * self.chirp_repetition_s)

    @property
    def unambiguous_range_m(self) -> float:
        """Largest range whose beat frequency stays below f_s/2."""
        return (SPEED_OF_LIGHT * self.sampling_freq_hz * self.sweep_duration_s
                / (4.0 * self.sweep_bandwidth_hz))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RadarConfig":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class Target:
    """Point reflector at a fixed range with constant radial velocity."""

    range_m: float
    radial_velocity_mps: float = 0.0
    rcs_m2: float = 1.0

    def __post_init__(self):
        if self.range_m <= 0:
            raise ValueError(f"target range must be positive, got {self.range_m}")
        if self.rcs_m2 <= 0:
            raise ValueError(f"target RCS must be positive, got {self.rcs_m2}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Target":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class InterfererConfig:
    """Aggressor radar ramp parameters and geometry.

    Exactly one of `amplitude_scale` (direct linear scaling of the
    free-space amplitude) and `target_sinr_db` (resolved later against a
    concrete clean frame) must be set.
    """

    carrier_freq_hz: float
    sweep_bandwidth_hz: float
    sweep_duration_s: float
    distance_m: float
    radial_velocity_mps: float = 0.0
    time_offset_s: float = 0.0
    amplitude_scale: Optional[float] = None
    target_sinr_db: Optional[float] = None

    def __post_init__(self):
        if self.carrier_freq_hz <= 0 or self.sweep_bandwidth_hz <= 0 or self.sweep_duration_s <= 0:
            raise ValueError("interferer sweep parameters must be positive")
        if self.distance_m <= 0:
            raise ValueError(f"interferer distance must be positive, got {self.distance_m}")
        if (self.amplitude_scale is None) == (self.target_sinr_db is None):
            raise ValueError("exactly one of amplitude_scale / target_sinr_db must be set")
        if self.amplitude_scale is not None and self.amplitude_scale < 0:
            raise ValueError("amplitude_scale must be >= 0")

    @property
    def chirp_rate(self) -> float:
        return self.sweep_bandwidth_hz / self.sweep_duration_s

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "InterfererConfig":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class BeatFrame:
    """N x M complex beat matrix: fast-time rows n, slow-time columns m."""

    samples: np.ndarray
    config: RadarConfig
    provenance: str = "clean"

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128)
        expected = (self.config.samples_per_chirp, self.config.chirps_per_frame)
        if samples.shape != expected:
            raise ValueError(f"beat frame shape {samples.shape} != N x M {expected}")
        if self.provenance not in PROVENANCE_TAGS:
            raise ValueError(f"provenance must be one of {PROVENANCE_TAGS}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("beat frame contains non-finite samples")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.samples.shape


def _as_frame(samples: np.ndarray, cfg: RadarConfig, provenance: str) -> BeatFrame:
    return BeatFrame(samples, cfg, provenance)


def chirp_frequency(cfg: RadarConfig, t: float) -> float:
    """Instantaneous frequency f_c + (B_sw/T_c) t within one sweep."""
    if not 0 <= t < cfg.sweep_duration_s:
        raise ValueError(f"t={t} outside the sweep [0, {cfg.sweep_duration_s})")
    return cfg.carrier_freq_hz + cfg.chirp_rate * t


def thermal_noise_power(cfg: RadarConfig) -> float:
    """Receiver thermal noise power [dBm] over the sampled bandwidth."""
    return -174.0 + 10.0 * math.log10(cfg.sampling_freq_hz) + cfg.noise_figure_db


def _check_target_limits(cfg: RadarConfig, target: Target) -> None:
    if abs(target.radial_velocity_mps) >= cfg.unambiguous_velocity_mps:
        raise ValueError(
            f"|v|={abs(target.radial_velocity_mps):.2f} m/s exceeds the unambiguous "
            f"velocity {cfg.unambiguous_velocity_mps:.2f} m/s"
        )
    if target.range_m >= cfg.unambiguous_range_m:
        raise ValueError(
            f"range {target.range_m:.1f} m exceeds the unambiguous range "
            f"{cfg.unambiguous_range_m:.1f} m"
        )


def synthesize_clean_beat(
    cfg: RadarConfig,
    targets: Sequence[Target] = (),
    noise_seed: int = 0,
    include_noise: bool = True,
) -> BeatFrame:
    """Beat frame of superimposed point-target echoes plus thermal noise.

    Each target contributes a 2D tone: range beat (B_sw/T_c)(2D/c) along
    fast time, Doppler f_c (2v/c) along slow time, and a constant phase
    f_c 2D/c.  The tone amplitude realizes the radar-equation echo power.
    Deterministic for a fixed seed.
    """
    n = np.arange(cfg.samples_per_chirp)[:, None] * cfg.sample_period_s
    m = np.arange(cfg.chirps_per_frame)[None, :] * cfg.chirp_repetition_s
    samples = np.zeros((cfg.samples_per_chirp, cfg.chirps_per_frame), dtype=np.complex128)
    for tgt in targets:
        _check_target_limits(cfg, tgt)
        amp = dbm_to_amplitude(link_budget.echo_power(cfg, tgt.range_m, tgt.rcs_m2))
        f_beat = cfg.chirp_rate * 2.0 * tgt.range_m / SPEED_OF_LIGHT
        f_doppler = cfg.carrier_freq_hz * 2.0 * tgt.radial_velocity_mps / SPEED_OF_LIGHT
        phase0 = 2.0 * np.pi * cfg.carrier_freq_hz * 2.0 * tgt.range_m / SPEED_OF_LIGHT
        samples += amp * np.exp(1j * (2.0 * np.pi * (f_beat * n + f_doppler * m) + phase0))
    if include_noise:
        sigma = math.sqrt(dbm_to_watts(thermal_noise_power(cfg)))
        rng = seeded_rng(noise_seed)
        shape = samples.shape
        samples += sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return _as_frame(samples, cfg, "clean")


def interference_beat_law(
    victim: RadarConfig, interferer: InterfererConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic phase and frequency difference laws at the ADC sample grid.

    Returns (phase_diff, freq_diff), each N x M, where phase_diff is the
    victim transmit phase minus the delayed aggressor phase (the mixer
    conjugates the received side) and freq_diff the instantaneous
    frequency difference deciding what survives the anti-alias filter.
    The aggressor sawtooth is free-running with back-to-back ramps; its
    carrier is shifted by the one-way Doppler of the closing geometry.
    """
    n = np.arange(victim.samples_per_chirp)[:, None]
    m = np.arange(victim.chirps_per_frame)[None, :]
    u = n * victim.sample_period_s                       # time into the current sweep
    t = m * victim.chirp_repetition_s + u                # absolute sample time

    alpha_v = victim.chirp_rate
    phase_victim = victim.initial_phase_rad + 2.0 * np.pi * (
        victim.carrier_freq_hz * u + 0.5 * alpha_v * u**2
    )
    freq_victim = victim.carrier_freq_hz + alpha_v * u

    fc_int = interferer.carrier_freq_hz * (
        1.0 - interferer.radial_velocity_mps / SPEED_OF_LIGHT
    )
    alpha_i = interferer.chirp_rate
    t_int = t - interferer.time_offset_s
    u_int = t_int - np.floor(t_int / interferer.sweep_duration_s) * interferer.sweep_duration_s
    phase_int = 2.0 * np.pi * (fc_int * u_int + 0.5 * alpha_i * u_int**2)
    freq_int = fc_int + alpha_i * u_int

    phase_diff = phase_victim - phase_int
    freq_diff = freq_victim - freq_int
    return phase_diff, freq_diff


def synthesize_interference(victim: RadarConfig, interferer: InterfererConfig) -> BeatFrame:
    """Aggressor contribution to the victim beat frame.

    Mixes the victim transmit chirp with the delayed aggressor sawtooth
    and masks every sample whose instantaneous frequency difference falls
    outside the ideal anti-alias passband |f| <= f_s/2.  The amplitude
    realizes the Friis one-way interference power, scaled by
    `amplitude_scale` (1.0 when the config defers to a SINR target).
    """
    phase_diff, freq_diff = interference_beat_law(victim, interferer)
    scale = 1.0 if interferer.amplitude_scale is None else interferer.amplitude_scale
    if scale == 0.0:
        samples = np.zeros(phase_diff.shape, dtype=np.complex128)
        return _as_frame(samples, victim, "interference-only")
    amp = scale * dbm_to_amplitude(link_budget.interference_power(victim, interferer.distance_m))
    in_band = np.abs(freq_diff) <= victim.sampling_freq_hz / 2.0
    samples = np.where(in_band, amp * np.exp(1j * phase_diff), 0.0 + 0.0j)
    return _as_frame(samples, victim, "interference-only")


def scale_frame(frame: BeatFrame, scale: float) -> BeatFrame:
    """Linearly scaled copy of a beat frame (provenance preserved)."""
    return _as_frame(frame.samples * scale, frame.config, frame.provenance)


def superimpose(clean: BeatFrame, interferences: Sequence[BeatFrame]) -> BeatFrame:
    """Element-wise sum of a clean frame and interference frames."""
    total = np.array(clean.samples, dtype=np.complex128)
    for frame in interferences:
        if frame.shape != clean.shape:
            raise ValueError(f"frame shape {frame.shape} != {clean.shape}")
        if frame.config != clean.config:
            raise ValueError("cannot superimpose frames with different configs")
        total = total + frame.samples
    return _as_frame(total, clean.config, "corrupted")


#: Table of aggressor ramp settings (B_sw ratio, T_c ratio, carrier offset)
#: for the seven qualitative interference scenarios.
_SCENARIO_TABLE = {
    1: (1.0, 1.0, 0.0),
    2: (1.0, 1.1, 0.0),
    3: (1.0, 2.0, 0.0),
    4: (2.0, 1.0, 0.0),
    5: (1.0, 1.0, -20.0e6),
    6: (2.0, 1.1, 0.0),
    7: (2.0, 2.0, 0.0),
}


def _scenario_time_offset(victim: RadarConfig, scenario: int) -> float:
    """Aggressor delay placing the interference pattern inside the ADC window."""
    window = victim.samples_per_chirp * victim.sample_period_s
    if scenario in (1, 2, 5, 6):
        # Commensurate slopes: park the ghost tone at range bin 20.
        bin_width = victim.sampling_freq_hz / victim.range_fft_points
        return 20.0 * bin_width / victim.chirp_rate
    if scenario == 3:
        # Half-slope aggressor: centre the full-band sweep in the window.
        return 2.0 * victim.sweep_duration_s - window / 2.0
    if scenario == 4:
        # Double-slope aggressor: difference slope -alpha, zero at u = 2 tau.
        return window / 4.0
    # Scenario 7: identical slope at doubled scale, same ghost delay as (1).
    bin_width = victim.sampling_freq_hz / victim.range_fft_points
    return 20.0 * bin_width / victim.chirp_rate


def scenario_preset(scenario: int) -> Tuple[RadarConfig, InterfererConfig]:
    """Victim/aggressor pair for one of the seven qualitative scenarios.

    The victim is the default 77 GHz configuration; the aggressor ramp is
    derived from it via the tabulated bandwidth ratio, duration ratio and
    carrier offset.  Scenario ids run 1..7.
    """
    if scenario not in _SCENARIO_TABLE:
        raise ValueError(f"scenario id must be in 1..7, got {scenario}")
    b_ratio, t_ratio, fc_offset = _SCENARIO_TABLE[scenario]
    victim = RadarConfig()
    interferer = InterfererConfig(
        carrier_freq_hz=victim.carrier_freq_hz + fc_offset,
        sweep_bandwidth_hz=victim.sweep_bandwidth_hz * b_ratio,
        sweep_duration_s=victim.sweep_duration_s * t_ratio,
        distance_m=10.0,
        radial_velocity_mps=0.0,
        time_offset_s=_scenario_time_offset(victim, scenario),
        amplitude_scale=1.0,
    )
    return victim, interferer

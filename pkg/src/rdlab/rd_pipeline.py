"""Range-Doppler transform and the scaling/normalization conventions used
by the dataset generator and the metrics.

The map is a plain 2D DFT of the beat matrix (no window, no scaling): a
P-point transform over fast time followed by a Q-point transform over
slow time, with the Doppler axis rotated so zero velocity sits at Q/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .signal_model import BeatFrame, RadarConfig, Target
from .units import SPEED_OF_LIGHT

VALUE_KINDS = ("complex", "magnitude")
SCALES = ("linear", "db")

#: Floor added inside the log to keep zero cells finite: 20*log10(eps) = -240 dB.
DB_EPSILON = 1e-12


@dataclass(frozen=True)
class NormalizationRecord:
    """Stats applied by `normalize`, sufficient to invert it exactly."""

    mean: float
    std: float
    z_min: float
    z_max: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "z_min": self.z_min,
            "z_max": self.z_max,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationRecord":
        return cls(d["mean"], d["std"], d["z_min"], d["z_max"], d.get("degenerate", False))


@dataclass(frozen=True)
class RdMap:
    """P x Q range-Doppler matrix (range bins p x Doppler bins q)."""

    values: np.ndarray
    config: RadarConfig
    value_kind: str = "complex"
    scale: str = "linear"
    normalization: Optional[NormalizationRecord] = None

    def __post_init__(self):
        values = np.array(self.values)
        expected = (self.config.range_fft_points, self.config.doppler_fft_points)
        if values.shape != expected:
            raise ValueError(f"map shape {values.shape} != P x Q {expected}")
        if self.value_kind not in VALUE_KINDS:
            raise ValueError(f"value_kind must be one of {VALUE_KINDS}")
        if self.scale not in SCALES:
            raise ValueError(f"scale must be one of {SCALES}")
        if self.scale == "db" and np.iscomplexobj(values):
            raise ValueError("dB maps must be real-valued")
        if self.normalization is not None and not self.normalization.degenerate:
            if values.min() < -1e-9 or values.max() > 1.0 + 1e-9:
                raise ValueError("normalized maps must lie in [0, 1]")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


def range_doppler_map(frame: BeatFrame) -> RdMap:
    """2D DFT of a beat frame: complex, linear scale, Doppler centred.

    Column-wise P-point DFT over fast time, then row-wise Q-point DFT over
    slow time; pure DFT sums with no window or normalization factor.  The
    Doppler axis is circularly shifted so zero Doppler lands at bin Q/2.
    """
    cfg = frame.config
    spectrum = np.fft.fft(frame.samples, n=cfg.range_fft_points, axis=0)
    spectrum = np.fft.fft(spectrum, n=cfg.doppler_fft_points, axis=1)
    spectrum = np.fft.fftshift(spectrum, axes=1)
    return RdMap(spectrum, cfg, value_kind="complex", scale="linear")


def to_magnitude(rd: RdMap) -> RdMap:
    """Linear magnitude of a complex (or magnitude) linear-scale map."""
    if rd.scale != "linear":
        raise ValueError("to_magnitude expects a linear-scale map")
    return RdMap(np.abs(rd.values), rd.config, value_kind="magnitude", scale="linear")


def to_db(rd: RdMap) -> RdMap:
    """Magnitude map in dB: 20*log10(|v| + eps), eps keeping log(0) finite."""
    if rd.scale != "linear":
        raise ValueError("to_db expects a linear-scale map")
    db = 20.0 * np.log10(np.abs(rd.values) + DB_EPSILON)
    return RdMap(db, rd.config, value_kind="magnitude", scale="db")


def db_to_linear_magnitude(rd: RdMap) -> RdMap:
    """Inverse of `to_db` (up to the eps floor)."""
    if rd.scale != "db":
        raise ValueError("db_to_linear_magnitude expects a dB map")
    if rd.normalization is not None:
        raise ValueError("denormalize the map first")
    mag = np.maximum(10.0 ** (rd.values / 20.0) - DB_EPSILON, 0.0)
    return RdMap(mag, rd.config, value_kind="magnitude", scale="linear")


def map_stats(values: np.ndarray) -> NormalizationRecord:
    """Standardize-then-min-max stats of a stack of dB maps."""
    mean = float(np.mean(values))
    std = float(np.std(values))
    if std == 0.0:
        return NormalizationRecord(mean, 0.0, 0.0, 0.0, degenerate=True)
    z = (values - mean) / std
    z_min = float(np.min(z))
    z_max = float(np.max(z))
    if z_max == z_min:
        return NormalizationRecord(mean, std, z_min, z_max, degenerate=True)
    return NormalizationRecord(mean, std, z_min, z_max)


def normalize(rd: RdMap, stats: Optional[NormalizationRecord] = None) -> RdMap:
    """Standardize then min-max a dB-magnitude map into [0, 1].

    `stats` normally carries the training-split global statistics; when
    omitted they are computed from the map itself (single-frame mode).
    Values outside the stats range clip to [0, 1].  A zero-variance map
    comes back as all 0.5 with the degenerate flag set.
    """
    if rd.scale != "db":
        raise ValueError("normalize expects a magnitude-dB map")
    if rd.normalization is not None:
        raise ValueError("map is already normalized")
    if stats is None:
        stats = map_stats(rd.values)
    if stats.degenerate:
        values = np.full(rd.shape, 0.5)
        return RdMap(values, rd.config, "magnitude", "db", stats)
    z = (rd.values - stats.mean) / stats.std
    values = np.clip((z - stats.z_min) / (stats.z_max - stats.z_min), 0.0, 1.0)
    return RdMap(values, rd.config, "magnitude", "db", stats)


def denormalize(rd: RdMap) -> RdMap:
    """Invert `normalize` using the stats recorded on the map."""
    if rd.normalization is None:
        raise ValueError("map carries no normalization record")
    stats = rd.normalization
    if stats.degenerate:
        raise ValueError("degenerate normalization cannot be inverted")
    z = rd.values * (stats.z_max - stats.z_min) + stats.z_min
    values = z * stats.std + stats.mean
    return RdMap(values, rd.config, "magnitude", "db", None)


def expected_peak_bin(cfg: RadarConfig, target: Target) -> Tuple[int, int]:
    """Closed-form RD peak location of a point target.

    p = round(f_b / (f_s/P)) with beat frequency f_b = 2 B_sw D / (c T_c);
    q = Q/2 + round(f_D Q T_r) with Doppler f_D = 2 f_c v / c.
    """
    f_beat = 2.0 * cfg.sweep_bandwidth_hz * target.range_m / (SPEED_OF_LIGHT * cfg.sweep_duration_s)
    f_doppler = 2.0 * cfg.carrier_freq_hz * target.radial_velocity_mps / SPEED_OF_LIGHT
    if f_beat > cfg.sampling_freq_hz / 2.0:
        raise ValueError(
            f"target at {target.range_m} m beats above f_s/2 (unambiguous range "
            f"{cfg.unambiguous_range_m:.1f} m)"
        )
    if abs(target.radial_velocity_mps) >= cfg.unambiguous_velocity_mps:
        raise ValueError(
            f"|v|={abs(target.radial_velocity_mps)} m/s exceeds the unambiguous velocity "
            f"{cfg.unambiguous_velocity_mps:.2f} m/s"
        )
    p = int(round(f_beat / (cfg.sampling_freq_hz / cfg.range_fft_points)))
    q = cfg.doppler_fft_points // 2 + int(
        round(f_doppler * cfg.doppler_fft_points * cfg.chirp_repetition_s)
    )
    return p, q


def range_axis_m(cfg: RadarConfig) -> np.ndarray:
    """Range in metres for each of the P range bins."""
    bin_hz = cfg.sampling_freq_hz / cfg.range_fft_points
    metres_per_hz = SPEED_OF_LIGHT * cfg.sweep_duration_s / (2.0 * cfg.sweep_bandwidth_hz)
    return np.arange(cfg.range_fft_points) * bin_hz * metres_per_hz


def velocity_axis_mps(cfg: RadarConfig) -> np.ndarray:
    """Radial velocity in m/s for each of the Q (centred) Doppler bins."""
    q = np.arange(cfg.doppler_fft_points) - cfg.doppler_fft_points // 2
    bin_hz = 1.0 / (cfg.doppler_fft_points * cfg.chirp_repetition_s)
    return q * bin_hz * SPEED_OF_LIGHT / (2.0 * cfg.carrier_freq_hz)

"""Free-space power levels of echoes and interference, and SINR-targeted
scaling of interference amplitude.

Interference travels one way (Friis), echoes two ways (radar equation), so
an aggressor at a distance comparable to the target dwarfs the echo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Tuple

import numpy as np

from .units import SPEED_OF_LIGHT, db_to_linear

if TYPE_CHECKING:  # pragma: no cover - type hints only
    from .rd_pipeline import RdMap
    from .signal_model import BeatFrame, RadarConfig


class InfeasibleSinrError(ValueError):
    """Requested SINR level cannot be reached by scaling the interference."""


@dataclass(frozen=True)
class PowerBudget:
    """Received interference vs. echo power for one geometry."""

    interference_power_dbm: float
    echo_power_dbm: float

    @property
    def margin_db(self) -> float:
        """How far the interference sits above the echo."""
        return self.interference_power_dbm - self.echo_power_dbm


def interference_power(cfg: "RadarConfig", r: float) -> float:
    """One-way received interference power [dBm] at interferer distance r.

    Friis free-space: P_T * G_trx * lambda^2 / ((4 pi)^2 r^2), in dB terms.
    """
    if r <= 0:
        raise ValueError(f"interferer distance must be positive, got {r}")
    lam = SPEED_OF_LIGHT / cfg.carrier_freq_hz
    return cfg.transmit_power_dbm + cfg.trx_gain_db + 20.0 * math.log10(lam / (4.0 * math.pi * r))


def echo_power(cfg: "RadarConfig", d: float, rcs: float) -> float:
    """Two-way received echo power [dBm] for a point target.

    Radar equation: P_T * G_trx * sigma * lambda^2 / ((4 pi)^3 d^4).
    """
    if d <= 0:
        raise ValueError(f"target distance must be positive, got {d}")
    if rcs <= 0:
        raise ValueError(f"radar cross-section must be positive, got {rcs}")
    lam = SPEED_OF_LIGHT / cfg.carrier_freq_hz
    return cfg.transmit_power_dbm + cfg.trx_gain_db + 10.0 * math.log10(
        rcs * lam**2 / ((4.0 * math.pi) ** 3 * d**4)
    )


def power_budget(cfg: "RadarConfig", r: float, d: float, rcs: float) -> PowerBudget:
    return PowerBudget(interference_power(cfg, r), echo_power(cfg, d, rcs))


def beat_sinr_scale(
    signal_mean_square: float,
    noise_mean_square: float,
    interference_mean_square: float,
    target_sinr_db: float,
) -> float:
    """Closed-form scale hitting a beat-domain SINR target.

    The beat-domain SINR of a corrupted frame is the mean-square echo
    power over the mean-square interference-plus-noise power at the ADC.
    Unlike the map-domain measurement, this is feasible for every target
    below the clean SNR, whatever the interference structure.
    """
    if interference_mean_square <= 0:
        raise InfeasibleSinrError("interference frame carries no in-band energy")
    if signal_mean_square <= 0:
        raise InfeasibleSinrError("clean frame carries no echo energy")
    needed = signal_mean_square / db_to_linear(target_sinr_db) - noise_mean_square
    if needed <= 0:
        clean_snr = 10.0 * np.log10(signal_mean_square / noise_mean_square)
        raise InfeasibleSinrError(
            f"target {target_sinr_db:.2f} dB is not below the clean beat SNR "
            f"{clean_snr:.2f} dB"
        )
    return math.sqrt(needed / interference_mean_square)


def measured_beat_sinr(
    signal_mean_square: float,
    noise_mean_square: float,
    interference_mean_square: float,
    scale: float,
) -> float:
    """Beat-domain SINR measured for a given interference scale."""
    return float(
        10.0
        * np.log10(
            signal_mean_square
            / (scale**2 * interference_mean_square + noise_mean_square)
        )
    )


def _measured_sinr_db(clean_cells, intf_cells, scale: float) -> float:
    """SINR of the superposition clean + scale*interference on cached cells."""
    o_c, o_i, n_c, n_i = clean_cells[0], intf_cells[0], clean_cells[1], intf_cells[1]
    num = np.mean(np.abs(o_c + scale * o_i) ** 2)
    den = np.mean(np.abs(n_c + scale * n_i) ** 2)
    return 10.0 * np.log10(num / den)


def scale_to_sinr(
    clean: "RdMap",
    interference_frame: "BeatFrame",
    target_sinr_db: float,
    object_cells: Sequence[Tuple[int, int]],
    noise_cells: Sequence[Tuple[int, int]],
    tolerance_db: float = 0.05,
) -> float:
    """Scale factor s so that RD(clean_beat + s*interference) measures
    `target_sinr_db` on the given object/noise cells.

    Uses the closed-form power-ratio solution ignoring clean/interference
    cross terms, then refines it by bisection until the measured SINR is
    within `tolerance_db` (well inside the +-0.5 dB contract).

    Raises InfeasibleSinrError when the target is at or above the clean
    SINR, when the interference frame carries no energy, or when even an
    arbitrarily strong interference cannot pull the SINR down that far.
    """
    from .rd_pipeline import range_doppler_map  # local import: avoids module cycle

    if len(object_cells) == 0 or len(noise_cells) == 0:
        raise ValueError("object and noise cell sets must be nonempty")
    intf_map = range_doppler_map(interference_frame)
    o_idx = tuple(np.asarray([c[0] for c in object_cells])), tuple(np.asarray([c[1] for c in object_cells]))
    n_idx = tuple(np.asarray([c[0] for c in noise_cells])), tuple(np.asarray([c[1] for c in noise_cells]))
    clean_cells = (clean.values[o_idx], clean.values[n_idx])
    intf_cells = (intf_map.values[o_idx], intf_map.values[n_idx])

    if not np.any(intf_cells[0]) and not np.any(intf_cells[1]):
        raise InfeasibleSinrError("interference frame carries no in-band energy")

    clean_sinr = _measured_sinr_db(clean_cells, intf_cells, 0.0)
    if target_sinr_db >= clean_sinr:
        raise InfeasibleSinrError(
            f"target {target_sinr_db:.2f} dB is not below the clean SINR {clean_sinr:.2f} dB"
        )

    # Closed-form guess: mean|C_O|^2 + s^2 mean|I_O|^2 = T (mean|C_N|^2 + s^2 mean|I_N|^2)
    t_lin = db_to_linear(target_sinr_db)
    po_c = np.mean(np.abs(clean_cells[0]) ** 2)
    pn_c = np.mean(np.abs(clean_cells[1]) ** 2)
    po_i = np.mean(np.abs(intf_cells[0]) ** 2)
    pn_i = np.mean(np.abs(intf_cells[1]) ** 2)
    denom = t_lin * pn_i - po_i
    if denom <= 0:
        # Interference-dominated limit already sits above the target.
        raise InfeasibleSinrError(
            "interference spectrum cannot reach the requested level (limit "
            f"{10 * np.log10(po_i / pn_i):.2f} dB > target {target_sinr_db:.2f} dB)"
        )
    s0 = math.sqrt(max((po_c - t_lin * pn_c), 0.0) / denom)
    if s0 == 0.0:
        s0 = math.sqrt(po_c / denom)

    if abs(_measured_sinr_db(clean_cells, intf_cells, s0) - target_sinr_db) <= tolerance_db:
        return s0

    # Bracket the decreasing SINR(s) curve around the closed-form guess.
    lo, hi = s0 / 16.0, s0 * 16.0
    for _ in range(80):
        if _measured_sinr_db(clean_cells, intf_cells, lo) >= target_sinr_db:
            break
        lo /= 4.0
    else:
        raise InfeasibleSinrError("failed to bracket the requested SINR from above")
    for _ in range(80):
        if _measured_sinr_db(clean_cells, intf_cells, hi) <= target_sinr_db:
            break
        hi *= 4.0
    else:
        raise InfeasibleSinrError("failed to bracket the requested SINR from below")

    s = s0
    for _ in range(200):
        s = math.sqrt(lo * hi)
        err = _measured_sinr_db(clean_cells, intf_cells, s) - target_sinr_db
        if abs(err) <= tolerance_db:
            return s
        if err > 0:
            lo = s
        else:
            hi = s
    return s

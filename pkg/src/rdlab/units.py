"""Unit conversions and the power/amplitude convention shared by all modules.

Powers are tracked in dBm into a 1 ohm reference.  A tone of power P watts
has peak amplitude sqrt(2*P), so its complex envelope has mean-square
|x|^2 = 2*P.  Band-limited noise of power P watts maps to a complex
circular Gaussian with E[|v|^2] = 2*P (variance P per quadrature).
"""

from __future__ import annotations

import numpy as np

#: Propagation speed used for all range/Doppler conversions [m/s].
SPEED_OF_LIGHT = 3.0e8


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise ValueError(f"power must be positive, got {watts}")
    return 10.0 * np.log10(watts) + 30.0


def dbm_to_amplitude(dbm: float) -> float:
    """Peak amplitude of a tone carrying `dbm` into the 1 ohm reference."""
    return float(np.sqrt(2.0 * dbm_to_watts(dbm)))


def dbm_to_mean_square(dbm: float) -> float:
    """Complex-envelope mean-square value E[|x|^2] equivalent to `dbm`."""
    return 2.0 * dbm_to_watts(dbm)


def db_to_linear(db: float) -> float:
    """Power ratio from decibels."""
    return 10.0 ** (db / 10.0)


def linear_to_db(ratio: float) -> float:
    """Decibels from a power ratio."""
    if ratio <= 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    return 10.0 * np.log10(ratio)

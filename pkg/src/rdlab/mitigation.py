"""Classical time-domain interference mitigation baselines.

Interfered samples are localized per frame by a robust amplitude
threshold (median + k * scaled MAD), then either nulled (zeroing) or
reconstructed by iterative sparse-spectrum thresholding (IMAT) applied
independently to each chirp.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .signal_model import BeatFrame, _as_frame

#: Consistency factor making the median absolute deviation estimate the
#: standard deviation of a Gaussian.
MAD_SCALE = 1.4826


@dataclass(frozen=True)
class InterferenceMask:
    """Boolean N x M matrix flagging corrupted beat samples."""

    flags: np.ndarray
    params: Dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        flags = np.array(self.flags, dtype=bool)
        flags.flags.writeable = False
        object.__setattr__(self, "flags", flags)

    @property
    def count(self) -> int:
        return int(self.flags.sum())


def detect_interfered_samples(frame: BeatFrame, k_sigma: float = 4.0) -> InterferenceMask:
    """Flag samples whose magnitude sticks out of the per-frame statistics.

    Threshold = median(|s|) + k_sigma * MAD-scaled deviation.  Median/MAD
    stay put under the very bursts being detected, unlike mean/std.
    """
    if k_sigma <= 0:
        raise ValueError("k_sigma must be positive")
    magnitude = np.abs(frame.samples)
    median = np.median(magnitude)
    spread = MAD_SCALE * np.median(np.abs(magnitude - median))
    flags = magnitude > median + k_sigma * spread
    return InterferenceMask(flags, {"method": "median-mad", "k_sigma": k_sigma})


def _check_mask(frame: BeatFrame, mask: InterferenceMask) -> None:
    if mask.flags.shape != frame.shape:
        raise ValueError(f"mask shape {mask.flags.shape} != frame shape {frame.shape}")


def zeroing(frame: BeatFrame, mask: InterferenceMask) -> BeatFrame:
    """Null the flagged samples; everything else passes through untouched."""
    _check_mask(frame, mask)
    samples = np.array(frame.samples)
    samples[mask.flags] = 0.0 + 0.0j
    return _as_frame(samples, frame.config, frame.provenance)


def imat(
    frame: BeatFrame,
    mask: InterferenceMask,
    iterations: int = 10,
    decay: float = 0.7,
) -> BeatFrame:
    """Iterative sparse-spectrum reconstruction of the nulled samples.

    Per fast-time column (one chirp): starting from the zeroed signal,
    each iteration k keeps only spectral coefficients above
    max|spectrum| * decay^k, transforms back, and re-imposes the original
    values on the unmasked samples.  Non-flagged samples are returned
    bit-identical.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not 0.0 < decay < 1.0:
        raise ValueError("decay must lie in (0, 1)")
    _check_mask(frame, mask)
    original = frame.samples
    flags = mask.flags
    x = np.array(original)
    x[flags] = 0.0 + 0.0j
    for k in range(iterations):
        spectrum = np.fft.fft(x, axis=0)
        keep = np.abs(spectrum) > np.abs(spectrum).max(axis=0, keepdims=True) * decay**k
        estimate = np.fft.ifft(np.where(keep, spectrum, 0.0), axis=0)
        x = np.where(flags, estimate, original)
    return _as_frame(x, frame.config, frame.provenance)

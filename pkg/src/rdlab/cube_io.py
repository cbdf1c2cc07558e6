"""RDC1 binary cube format: bit-exact storage for stacks of RD maps or
raw beat frames.

Layout (little-endian): magic b"RDC1", u32 version=1, u32 kind
(0 = complex interleaved f32, 1 = magnitude f32), u32 dim0, u32 dim1,
u32 frame_count, then the payload frame-major, row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

MAGIC = b"RDC1"
VERSION = 1
KIND_COMPLEX = 0
KIND_MAGNITUDE = 1
_HEADER = struct.Struct("<4sIIIII")

#: Refuse to allocate cubes above this payload size (4 GiB).
_MAX_PAYLOAD_BYTES = 4 * 1024**3


class CubeFormatError(ValueError):
    """Malformed RDC1 file; `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def write_rd_cube(maps: Union[np.ndarray, Sequence[np.ndarray]], path) -> None:
    """Write a stack of equally-shaped 2D frames as an RDC1 cube.

    Complex input is stored as interleaved float32 (kind 0), real input
    as plain float32 (kind 1).
    """
    frames = np.asarray(maps)
    if frames.ndim == 2:
        frames = frames[None, ...]
    if frames.ndim != 3:
        raise ValueError(f"expected frames x dim0 x dim1 data, got shape {frames.shape}")
    count, dim0, dim1 = frames.shape
    if np.iscomplexobj(frames):
        kind = KIND_COMPLEX
        payload = np.empty((count, dim0, dim1, 2), dtype="<f4")
        payload[..., 0] = frames.real
        payload[..., 1] = frames.imag
    else:
        kind = KIND_MAGNITUDE
        payload = frames.astype("<f4")
    header = _HEADER.pack(MAGIC, VERSION, kind, dim0, dim1, count)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_rd_cube(path) -> np.ndarray:
    """Read an RDC1 cube back as a (frames, dim0, dim1) array.

    Complex cubes come back as complex64, magnitude cubes as float32;
    corruption raises CubeFormatError with the offending byte offset.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise CubeFormatError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}", 0)
    if len(raw) < _HEADER.size:
        raise CubeFormatError(f"truncated header: {len(raw)} of {_HEADER.size} bytes", len(raw))
    _, version, kind, dim0, dim1, count = _HEADER.unpack_from(raw, 0)
    if version != VERSION:
        raise CubeFormatError(f"unsupported version {version}", 4)
    if kind not in (KIND_COMPLEX, KIND_MAGNITUDE):
        raise CubeFormatError(f"unknown kind {kind}", 8)
    if dim0 == 0:
        raise CubeFormatError("dim0 must be positive", 12)
    if dim1 == 0:
        raise CubeFormatError("dim1 must be positive", 16)
    values_per_frame = dim0 * dim1 * (2 if kind == KIND_COMPLEX else 1)
    payload_bytes = count * values_per_frame * 4
    if payload_bytes > _MAX_PAYLOAD_BYTES:
        raise CubeFormatError(
            f"declared payload of {payload_bytes} bytes exceeds the {_MAX_PAYLOAD_BYTES} limit", 20
        )
    available = len(raw) - _HEADER.size
    if available != payload_bytes:
        raise CubeFormatError(
            f"payload holds {available} bytes, header declares {payload_bytes}",
            _HEADER.size + min(available, payload_bytes),
        )
    flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    if kind == KIND_COMPLEX:
        pairs = flat.reshape(count, dim0, dim1, 2)
        return (pairs[..., 0] + 1j * pairs[..., 1]).astype(np.complex64)
    return flat.reshape(count, dim0, dim1).copy()


def ingest_adc_cube(path, cfg) -> List:
    """Materialize beat frames from an externally recorded complex cube.

    The cube must be kind 0 with per-frame dims (N, M) matching the radar
    configuration; this is the substitution point for running the
    pipeline on real ADC recordings.
    """
    from .signal_model import BeatFrame

    frames = read_rd_cube(path)
    if not np.iscomplexobj(frames):
        raise ValueError("ADC cubes must be complex (kind 0)")
    expected = (cfg.samples_per_chirp, cfg.chirps_per_frame)
    if frames.shape[1:] != expected:
        raise ValueError(f"cube frames are {frames.shape[1:]}, config expects N x M {expected}")
    return [
        BeatFrame(frame.astype(np.complex128), cfg, "corrupted") for frame in frames
    ]

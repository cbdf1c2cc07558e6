"""Reader/writer for the RDC1 cube format produced by the dataset
generator.

Little-endian layout: magic b"RDC1", u32 version=1, u32 kind (0 complex
interleaved f32, 1 magnitude f32), u32 dim0, u32 dim1, u32 frame_count,
payload frame-major row-major.  Implemented against the published format
description; this package deliberately shares no code with the
generator.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"RDC1"
_HEADER = struct.Struct("<4sIIIII")
KIND_COMPLEX = 0
KIND_MAGNITUDE = 1


def read_cube(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not an RDC1 cube")
    _, version, kind, dim0, dim1, count = _HEADER.unpack_from(raw, 0)
    if version != 1 or kind not in (KIND_COMPLEX, KIND_MAGNITUDE):
        raise ValueError(f"{path}: unsupported version/kind {version}/{kind}")
    flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    if kind == KIND_COMPLEX:
        pairs = flat.reshape(count, dim0, dim1, 2)
        return (pairs[..., 0] + 1j * pairs[..., 1]).astype(np.complex64)
    return flat.reshape(count, dim0, dim1).copy()


def write_magnitude_cube(frames: np.ndarray, path) -> None:
    frames = np.asarray(frames, dtype=np.float32)
    if frames.ndim == 2:
        frames = frames[None, ...]
    count, dim0, dim1 = frames.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, 1, KIND_MAGNITUDE, dim0, dim1, count))
        fh.write(frames.astype("<f4").tobytes())

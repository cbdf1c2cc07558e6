"""Dataset access: manifest parsing and the triplet sample loader.

A sample is three consecutive interfered range-Doppler maps (frames t,
t-1, t-2) stacked as channels, paired with the clean reference at frame
t.  Maps are stored range x Doppler (64 x 128) and transposed to
h x w = 128 x 64 for the network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch
from torch.utils.data import Dataset

from .rdc1 import read_cube

MANIFEST_NAME = "manifest.jsonl"


@dataclass(frozen=True)
class NormStats:
    """Normalization applied by the generator; invertible."""

    mean: float
    std: float
    z_min: float
    z_max: float

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        z = values * (self.z_max - self.z_min) + self.z_min
        return z * self.std + self.mean


@dataclass(frozen=True)
class ManifestInfo:
    config_hash: str
    normalization: NormStats
    counts: Dict[str, int]
    sinr_levels_db: Tuple[float, ...]


def load_manifest(dataset_dir) -> Tuple[ManifestInfo, List[dict]]:
    path = Path(dataset_dir) / MANIFEST_NAME
    header = None
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec["record"] == "header":
                header = rec
            elif rec["record"] == "sample":
                samples.append(rec)
    if header is None:
        raise ValueError(f"{path}: no header record")
    norm = header["normalization"]
    if norm.get("degenerate"):
        raise ValueError("dataset normalization is degenerate; cannot train on it")
    info = ManifestInfo(
        config_hash=header["config_hash"],
        normalization=NormStats(norm["mean"], norm["std"], norm["z_min"], norm["z_max"]),
        counts=header["counts"],
        sinr_levels_db=tuple(header["sinr_levels_db"]),
    )
    return info, samples


class TripletDataset(Dataset):
    """Torch dataset over one split of a generated triplet dataset."""

    def __init__(self, dataset_dir, split: Optional[str] = "train"):
        self.root = Path(dataset_dir)
        self.info, samples = load_manifest(dataset_dir)
        self.samples = [s for s in samples if split is None or s["split"] == split]
        if not self.samples:
            raise ValueError(f"split {split!r} is empty")
        self._cubes: Dict[str, np.ndarray] = {}

    def _frame(self, ref: dict) -> np.ndarray:
        cube = self._cubes.get(ref["path"])
        if cube is None:
            cube = read_cube(self.root / ref["path"])
            self._cubes[ref["path"]] = cube
        return cube[ref["frame"]]

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, idx: int):
        rec = self.samples[idx]
        maps = [self._frame(rec["files"][key]).T for key in ("t", "t1", "t2")]
        x = torch.from_numpy(np.stack(maps).astype(np.float32))
        y = torch.from_numpy(self._frame(rec["files"]["ref"]).T.astype(np.float32))[None, ...]
        return x, y

    def sample_id(self, idx: int) -> str:
        return self.samples[idx]["sample_id"]

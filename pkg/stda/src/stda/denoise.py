"""Batch inference: denoise a dataset split and write maps the evaluator
can score (`evaluate --method denoised --denoised-dir ...`).

Outputs are denormalized back to dB magnitude with the manifest
statistics and written one single-frame RDC1 cube per sample, named
`<sample_id>.rdc`, in the generator's range x Doppler orientation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np
import torch

from .data import TripletDataset
from .rdc1 import write_magnitude_cube
from .train import load_checkpoint


def denoise_dataset(checkpoint_path, dataset_dir, out_dir, split: Optional[str] = "test") -> int:
    """Run the checkpointed model over a split; returns the sample count.

    Refuses datasets whose config hash differs from the one recorded in
    the checkpoint (the normalization statistics would not match).
    """
    model, meta = load_checkpoint(checkpoint_path)
    dataset = TripletDataset(dataset_dir, split)
    if dataset.info.config_hash != meta["dataset_hash"]:
        raise ValueError(
            f"dataset hash {dataset.info.config_hash[:12]} does not match the "
            f"checkpoint's {meta['dataset_hash'][:12]}; refusing to denormalize"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats = dataset.info.normalization
    with torch.no_grad():
        for idx in range(len(dataset)):
            x, _ = dataset[idx]
            predicted = model(x.unsqueeze(0))[0, 0].numpy()
            db_map = stats.denormalize(np.clip(predicted, 0.0, 1.0)).T
            write_magnitude_cube(db_map.astype(np.float32),
                                 out / f"{dataset.sample_id(idx)}.rdc")
    return len(dataset)

"""Scoring of mitigation methods over a generated dataset.

Classical methods operate in the time domain, so the corrupted beat
frames are re-synthesized deterministically from the manifest metadata
(scene seed, per-frame noise seed, recorded interferer draw and resolved
amplitude).  Externally denoised maps are read from per-sample RDC1
cubes instead.  Results serialize to CSV
(`sample_id,method,sinr_db,evm,ap_percent`) and line-delimited JSON.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .cube_io import read_rd_cube
from .dataset import (
    DatasetManifest,
    SampleRecord,
    frame_noise_seed,
    load_manifest,
    targets_at_frame,
)
from .detection_metrics import (
    Peak,
    PeakList,
    average_precision,
    ca_cfar,
    cluster_peaks,
    evm,
    object_noise_cells,
    sinr,
)
from .mitigation import detect_interfered_samples, imat, zeroing
from .rd_pipeline import (
    RdMap,
    db_to_linear_magnitude,
    expected_peak_bin,
    range_doppler_map,
    to_magnitude,
)
from .signal_model import (
    BeatFrame,
    InterfererConfig,
    scale_frame,
    superimpose,
    synthesize_clean_beat,
    synthesize_interference,
)

METHODS = ("corrupted", "zeroing", "imat", "denoised")

CSV_HEADER = ("sample_id", "method", "sinr_db", "evm", "ap_percent")


@dataclass(frozen=True)
class MetricRow:
    sample_id: str
    method: str
    sinr_db: float
    evm: float
    ap_percent: float

    def as_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "method": self.method,
            "sinr_db": self.sinr_db,
            "evm": self.evm,
            "ap_percent": self.ap_percent,
        }


def _interferer_from_record(record: Dict) -> InterfererConfig:
    kwargs = {
        k: record[k]
        for k in (
            "carrier_freq_hz",
            "sweep_bandwidth_hz",
            "sweep_duration_s",
            "distance_m",
            "radial_velocity_mps",
            "time_offset_s",
        )
    }
    return InterfererConfig(**kwargs, amplitude_scale=1.0)


def resynthesize_frames(
    manifest: DatasetManifest, sample: SampleRecord
) -> tuple[BeatFrame, BeatFrame]:
    """Clean and corrupted beat frames at a sample's frame t."""
    cfg = manifest.victim_config
    scene = manifest.scene
    seq, t = sample.sequence, sample.frame_t
    targets = targets_at_frame(scene, seq, t)
    clean = synthesize_clean_beat(
        cfg, targets, noise_seed=frame_noise_seed(scene.master_seed, seq, t), include_noise=True
    )
    intf = synthesize_interference(cfg, _interferer_from_record(sample.interferer))
    scaled = scale_frame(intf, sample.interferer["resolved_amplitude_scale"])
    extra = sample.interferer.get("additional_interferers", [])
    frames = [scaled]
    for rec in extra:
        more = synthesize_interference(cfg, _interferer_from_record(rec))
        frames.append(scale_frame(more, sample.interferer["resolved_amplitude_scale"]))
    return clean, superimpose(clean, frames)


def measured_beat_sinr_of_sample(manifest: DatasetManifest, sample: SampleRecord) -> float:
    """Independent beat-domain SINR re-measurement from re-synthesized frames."""
    from .dataset import echo_mean_square
    from .signal_model import thermal_noise_power
    from .units import dbm_to_mean_square

    cfg = manifest.victim_config
    targets = targets_at_frame(manifest.scene, sample.sequence, sample.frame_t)
    signal_ms = echo_mean_square(cfg, targets)
    intf = synthesize_interference(cfg, _interferer_from_record(sample.interferer))
    scaled = scale_frame(intf, sample.interferer["resolved_amplitude_scale"])
    extra = [
        scale_frame(
            synthesize_interference(cfg, _interferer_from_record(rec)),
            sample.interferer["resolved_amplitude_scale"],
        )
        for rec in sample.interferer.get("additional_interferers", [])
    ]
    total = scaled.samples if not extra else scaled.samples + sum(f.samples for f in extra)
    intf_ms = float(np.mean(np.abs(total) ** 2))
    noise_ms = dbm_to_mean_square(thermal_noise_power(cfg))
    return float(10.0 * np.log10(signal_ms / (intf_ms + noise_ms)))


def _reference_peaks(manifest: DatasetManifest, sample: SampleRecord, clean_map: RdMap) -> PeakList:
    """Ground-truth peaks straight from the simulated target bins."""
    cfg = manifest.victim_config
    magnitudes = np.abs(clean_map.values)
    peaks = {}
    for target in targets_at_frame(manifest.scene, sample.sequence, sample.frame_t):
        p, q = expected_peak_bin(cfg, target)
        peaks[(p, q)] = max(peaks.get((p, q), 0.0), float(max(magnitudes[p, q], 1e-30)))
    return PeakList(tuple(Peak(p, q, m) for (p, q), m in sorted(peaks.items())),
                    {"source": "simulation-ground-truth"})


def _denoised_map(denoised_dir, sample: SampleRecord, cfg) -> RdMap:
    path = Path(denoised_dir) / f"{sample.sample_id}.rdc"
    frames = read_rd_cube(path)
    if np.iscomplexobj(frames) or frames.shape[0] != 1:
        raise ValueError(f"{path} must hold one magnitude (dB) frame")
    db = RdMap(frames[0].astype(float), cfg, "magnitude", "db")
    return db_to_linear_magnitude(db)


def evaluate_sample(
    manifest: DatasetManifest,
    sample: SampleRecord,
    method: str,
    denoised_dir=None,
    k_sigma: float = 4.0,
    imat_iterations: int = 10,
    imat_decay: float = 0.7,
) -> MetricRow:
    """SINR / EVM / AP of one mitigation method on one sample."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    clean_beat, corrupted_beat = resynthesize_frames(manifest, sample)
    clean_map = range_doppler_map(clean_beat)
    objects, noise_cells = object_noise_cells(to_magnitude(clean_map))
    reference_peaks = _reference_peaks(manifest, sample, clean_map)

    if method == "corrupted":
        test_map = range_doppler_map(corrupted_beat)
        clean_for_evm = clean_map
    elif method in ("zeroing", "imat"):
        mask = detect_interfered_samples(corrupted_beat, k_sigma=k_sigma)
        if method == "zeroing":
            mitigated = zeroing(corrupted_beat, mask)
        else:
            mitigated = imat(corrupted_beat, mask, iterations=imat_iterations, decay=imat_decay)
        test_map = range_doppler_map(mitigated)
        clean_for_evm = clean_map
    else:
        if denoised_dir is None:
            raise ValueError("method 'denoised' needs a denoised map directory")
        test_map = _denoised_map(denoised_dir, sample, manifest.victim_config)
        clean_for_evm = to_magnitude(clean_map)

    detections = cluster_peaks(ca_cfar(to_magnitude(test_map)))
    return MetricRow(
        sample_id=sample.sample_id,
        method=method,
        sinr_db=sinr(test_map, objects, noise_cells),
        evm=evm(clean_for_evm, test_map, objects),
        ap_percent=average_precision(reference_peaks, detections),
    )


def evaluate_dataset(
    dataset_dir,
    method: str,
    split: Optional[str] = "test",
    denoised_dir=None,
    k_sigma: float = 4.0,
    imat_iterations: int = 10,
    imat_decay: float = 0.7,
    sample_ids: Optional[Sequence[str]] = None,
) -> List[MetricRow]:
    """Evaluate one method over a dataset split (None = all samples)."""
    manifest, samples = load_manifest(dataset_dir)
    rows = []
    wanted = set(sample_ids) if sample_ids is not None else None
    for sample in samples:
        if split is not None and sample.split != split:
            continue
        if wanted is not None and sample.sample_id not in wanted:
            continue
        rows.append(
            evaluate_sample(
                manifest,
                sample,
                method,
                denoised_dir=denoised_dir,
                k_sigma=k_sigma,
                imat_iterations=imat_iterations,
                imat_decay=imat_decay,
            )
        )
    return rows


def write_metrics_csv(rows: Iterable[MetricRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [row.sample_id, row.method, f"{row.sinr_db:.6f}", f"{row.evm:.6f}",
                 f"{row.ap_percent:.6f}"]
            )


def write_metrics_jsonl(rows: Iterable[MetricRow], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row.as_dict(), sort_keys=True) + "\n")


def read_metrics_csv(path) -> List[MetricRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                MetricRow(
                    sample_id=rec["sample_id"],
                    method=rec["method"],
                    sinr_db=float(rec["sinr_db"]),
                    evm=float(rec["evm"]),
                    ap_percent=float(rec["ap_percent"]),
                )
            )
    return rows

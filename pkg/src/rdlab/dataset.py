"""Synthetic triplet dataset generation.

Simulated driving-style sequences of persistent point targets are
corrupted at seven SINR levels by Monte-Carlo-drawn aggressor radars.
Per sequence and level, consecutive frames are grouped into
non-overlapping triplets (t, t-1, t-2) paired with the clean reference
at t, shuffled, split 60/20/20 and stored as RDC1 cubes plus a
line-delimited JSON manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cube_io import read_rd_cube, write_rd_cube, ingest_adc_cube  # noqa: F401  (re-export)
from .link_budget import InfeasibleSinrError, beat_sinr_scale, measured_beat_sinr
from .rd_pipeline import (
    NormalizationRecord,
    RdMap,
    map_stats,
    range_doppler_map,
    to_db,
)
from .signal_model import (
    BeatFrame,
    InterfererConfig,
    RadarConfig,
    Target,
    derive_seed,
    scale_frame,
    seeded_rng,
    superimpose,
    synthesize_clean_beat,
    synthesize_interference,
    thermal_noise_power,
)
from .units import SPEED_OF_LIGHT, dbm_to_mean_square

#: The seven interference magnitudes applied to every frame [dB].
SINR_LEVELS_DB = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0)

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.jsonl"

#: Monte-Carlo bounds for the aggressor draw.
INTERFERER_CARRIER_GRID_HZ = tuple(76.8e9 + 0.1e9 * k for k in range(5))
INTERFERER_BANDWIDTH_HZ = (120.0e6, 400.0e6)
INTERFERER_DURATION_S = (4.0e-6, 30.0e-6)
INTERFERER_DISTANCE_M = (2.0, 63.0)
INTERFERER_VELOCITY_MPS = (-23.05, 0.0)

_MAX_DRAW_ATTEMPTS = 8


@dataclass(frozen=True)
class SceneSpec:
    """Simulated stand-in for recorded driving sequences.

    Targets are drawn once per sequence and propagate with constant speed,
    bouncing between the range bounds so they stay in view.  Speeds are
    magnitudes with a random initial direction; the lower speed and range
    bounds keep target peaks (and their one-bin guard rings) clear of the
    clutter-filter cross around zero range and zero Doppler.
    """

    sequences: int = 1
    frames_per_sequence: int = 100
    target_count_range: Tuple[int, int] = (1, 3)
    range_range_m: Tuple[float, float] = (12.0, 55.0)
    speed_range_mps: Tuple[float, float] = (1.0, 20.0)
    rcs_range_m2: Tuple[float, float] = (1.0, 20.0)
    master_seed: int = 0
    frame_interval_s: float = 1.0 / 30.0
    interferers_per_frame: int = 1

    def __post_init__(self):
        if self.sequences < 1 or self.frames_per_sequence < 1:
            raise ValueError("sequence and frame counts must be >= 1")
        if self.target_count_range[0] < 1 or self.target_count_range[0] > self.target_count_range[1]:
            raise ValueError("invalid target count range")
        for name in ("range_range_m", "speed_range_mps", "rcs_range_m2"):
            lo, hi = getattr(self, name)
            if lo <= 0 or hi < lo:
                raise ValueError(f"invalid {name}: ({lo}, {hi})")
        if self.frame_interval_s <= 0:
            raise ValueError("frame interval must be positive")
        if self.interferers_per_frame < 1:
            raise ValueError("interferers_per_frame must be >= 1")


@dataclass(frozen=True)
class SampleRecord:
    """One manifest line: a triplet of corrupted maps plus its reference."""

    sample_id: str
    split: str
    sequence: int
    frame_t: int
    sinr_db: float
    measured_sinr_db: float
    interferer: Dict
    files: Dict

    def as_dict(self) -> dict:
        return {
            "record": "sample",
            "sample_id": self.sample_id,
            "split": self.split,
            "sequence": self.sequence,
            "frame_t": self.frame_t,
            "sinr_db": self.sinr_db,
            "measured_sinr_db": self.measured_sinr_db,
            "interferer": self.interferer,
            "files": self.files,
        }


@dataclass(frozen=True)
class DatasetManifest:
    """Header bookkeeping of a generated dataset."""

    format_version: int
    master_seed: int
    victim_config: RadarConfig
    scene: SceneSpec
    config_hash: str
    counts: Dict[str, int]
    normalization: NormalizationRecord
    skips: Tuple[Dict, ...]

    def as_dict(self) -> dict:
        return {
            "record": "header",
            "format_version": self.format_version,
            "master_seed": self.master_seed,
            "victim_config": asdict(self.victim_config),
            "scene": asdict(self.scene),
            "config_hash": self.config_hash,
            "counts": dict(self.counts),
            "normalization": self.normalization.as_dict(),
            "sinr_levels_db": list(SINR_LEVELS_DB),
            # The level knob is applied at synthesis time in the beat
            # domain: mean-square echo power over mean-square
            # interference-plus-noise power at the ADC.
            "sinr_knob": "beat-domain",
            "skips": list(self.skips),
        }


def sample_interferer(rng: np.random.Generator) -> InterfererConfig:
    """Monte-Carlo aggressor draw: uniform over the tabulated intervals.

    Carrier frequency lives on a 0.1 GHz grid; the SINR level is drawn
    from the seven-step grid and stored as the (unresolved) target SINR.
    The ramp delay is the propagation delay plus a uniform phase within
    one aggressor sweep.
    """
    carrier = float(rng.choice(INTERFERER_CARRIER_GRID_HZ))
    bandwidth = float(rng.uniform(*INTERFERER_BANDWIDTH_HZ))
    duration = float(rng.uniform(*INTERFERER_DURATION_S))
    distance = float(rng.uniform(*INTERFERER_DISTANCE_M))
    velocity = float(rng.uniform(*INTERFERER_VELOCITY_MPS))
    level = float(rng.choice(SINR_LEVELS_DB))
    offset = distance / SPEED_OF_LIGHT + float(rng.uniform(0.0, duration))
    return InterfererConfig(
        carrier_freq_hz=carrier,
        sweep_bandwidth_hz=bandwidth,
        sweep_duration_s=duration,
        distance_m=distance,
        radial_velocity_mps=velocity,
        time_offset_s=offset,
        target_sinr_db=level,
    )


def clutter_filter(
    rd: RdMap,
    range_bins: Optional[Sequence[int]] = None,
    doppler_bins: Optional[Sequence[int]] = None,
) -> RdMap:
    """Suppress near-sensor clutter around the zero range/velocity axes.

    Cells inside the cross region (whole rows of the given range bins and
    whole columns of the given Doppler bins) that exceed the map median
    are replaced by that median; everything else is untouched.
    """
    q_mid = rd.config.doppler_fft_points // 2
    if range_bins is None:
        range_bins = (0, 1)
    if doppler_bins is None:
        doppler_bins = (q_mid - 1, q_mid, q_mid + 1)
    rows, cols = rd.shape
    if any(not 0 <= b < rows for b in range_bins):
        raise ValueError("range bins outside the map")
    if any(not 0 <= b < cols for b in doppler_bins):
        raise ValueError("Doppler bins outside the map")
    values = np.array(rd.values)
    median = np.median(values)
    region = np.zeros(rd.shape, dtype=bool)
    region[list(range_bins), :] = True
    region[:, list(doppler_bins)] = True
    values[region & (values > median)] = median
    return RdMap(values, rd.config, rd.value_kind, rd.scale, rd.normalization)


def sequence_targets(scene: SceneSpec, sequence: int) -> List[Tuple[float, float, float]]:
    """Initial (range, signed velocity, rcs) draws for one sequence."""
    rng = seeded_rng(scene.master_seed, "targets", sequence)
    count = int(rng.integers(scene.target_count_range[0], scene.target_count_range[1] + 1))
    draws = []
    for _ in range(count):
        d0 = float(rng.uniform(*scene.range_range_m))
        speed = float(rng.uniform(*scene.speed_range_mps))
        sign = 1.0 if rng.random() < 0.5 else -1.0
        rcs = float(rng.uniform(*scene.rcs_range_m2))
        draws.append((d0, sign * speed, rcs))
    return draws


def targets_at_frame(scene: SceneSpec, sequence: int, frame: int) -> List[Target]:
    """Targets propagated to one frame, bouncing between the range bounds."""
    lo, hi = scene.range_range_m
    span = hi - lo
    targets = []
    for d0, v0, rcs in sequence_targets(scene, sequence):
        x = d0 + v0 * frame * scene.frame_interval_s
        y = (x - lo) % (2.0 * span)
        if y <= span:
            d, v = lo + y, v0
        else:
            d, v = lo + 2.0 * span - y, -v0
        targets.append(Target(range_m=max(d, 1e-3), radial_velocity_mps=v, rcs_m2=rcs))
    return targets


def frame_noise_seed(master_seed: int, sequence: int, frame: int) -> int:
    """Per-frame noise seed: order-independent, reproducible from the manifest."""
    return derive_seed(master_seed, "noise", sequence, frame)


def _clean_frame(scene: SceneSpec, cfg: RadarConfig, sequence: int, frame: int):
    targets = targets_at_frame(scene, sequence, frame)
    seed = frame_noise_seed(scene.master_seed, sequence, frame)
    return synthesize_clean_beat(cfg, targets, noise_seed=seed, include_noise=True), targets


def _interferer_record(intf: InterfererConfig, resolved_scale: float, attempt: int) -> Dict:
    rec = asdict(intf)
    rec["resolved_amplitude_scale"] = resolved_scale
    rec["attempt"] = attempt
    return rec


#: Retry budget for draws whose ramps never cross the victim passband.
_MAX_MASKED_REDRAWS = 64


def _draw_in_band_interference(
    scene: SceneSpec, cfg: RadarConfig, sequence: int, frame: int, level_idx: int, attempt: int
):
    """One Monte-Carlo aggressor set with nonzero in-band energy.

    Roughly half of the raw draws sweep entirely outside the victim
    passband and contribute nothing; those are resampled (they would
    leave the frame uninterfered), without burning a feasibility attempt.
    """
    level = SINR_LEVELS_DB[level_idx]
    for reject in range(_MAX_MASKED_REDRAWS):
        rng = seeded_rng(
            scene.master_seed, "interferer", sequence, frame, level_idx, attempt, reject
        )
        drawn = [
            replace(sample_interferer(rng), target_sinr_db=level)
            for _ in range(scene.interferers_per_frame)
        ]
        frames = [synthesize_interference(cfg, d) for d in drawn]
        total = frames[0]
        if len(frames) > 1:
            total = BeatFrame(
                np.sum([f.samples for f in frames], axis=0), cfg, "interference-only"
            )
        power = float(np.mean(np.abs(total.samples) ** 2))
        if power > 0.0:
            return drawn, total, power
    return None


def _corrupt_frame(
    scene: SceneSpec,
    cfg: RadarConfig,
    sequence: int,
    frame: int,
    level_idx: int,
    clean_beat: BeatFrame,
    echo_mean_square: float,
):
    """Corrupt one (frame, level) at its beat-domain SINR level.

    The SINR knob is the ratio of mean-square echo power to mean-square
    interference-plus-noise power at the ADC, solved in closed form.
    Returns (corrupted dB-filtered map values, record dict, measured SINR)
    or None when no draw out of the retry budget is feasible.
    """
    level = SINR_LEVELS_DB[level_idx]
    noise_ms = dbm_to_mean_square(thermal_noise_power(cfg))
    for attempt in range(_MAX_DRAW_ATTEMPTS):
        drawn_set = _draw_in_band_interference(scene, cfg, sequence, frame, level_idx, attempt)
        if drawn_set is None:
            continue
        drawn, total, intf_ms = drawn_set
        try:
            scale = beat_sinr_scale(echo_mean_square, noise_ms, intf_ms, level)
        except InfeasibleSinrError:
            continue
        corrupted = superimpose(clean_beat, [scale_frame(total, scale)])
        corrupted_map = range_doppler_map(corrupted)
        measured = measured_beat_sinr(echo_mean_square, noise_ms, intf_ms, scale)
        db_map = clutter_filter(to_db(corrupted_map))
        record = _interferer_record(drawn[0], scale, attempt)
        if len(drawn) > 1:
            record["additional_interferers"] = [asdict(d) for d in drawn[1:]]
        return db_map.values, record, measured
    return None


def echo_mean_square(cfg: RadarConfig, targets) -> float:
    """Mean-square beat power of the noise-free echo superposition."""
    echo = synthesize_clean_beat(cfg, targets, include_noise=False)
    return float(np.mean(np.abs(echo.samples) ** 2))


def _synthesize_sequence_level(args) -> Dict:
    """Worker: corrupt one whole sequence at one SINR level."""
    scene, cfg, sequence, level_idx = args
    n_frames = scene.frames_per_sequence
    maps = np.zeros((n_frames, cfg.range_fft_points, cfg.doppler_fft_points))
    records: List[Optional[Dict]] = [None] * n_frames
    measured: List[Optional[float]] = [None] * n_frames
    failed: List[int] = []
    for frame in range(n_frames):
        clean_beat, targets = _clean_frame(scene, cfg, sequence, frame)
        out = _corrupt_frame(
            scene, cfg, sequence, frame, level_idx, clean_beat,
            echo_mean_square(cfg, targets),
        )
        if out is None:
            failed.append(frame)
            continue
        maps[frame], records[frame], measured[frame] = out
    return {
        "sequence": sequence,
        "level_idx": level_idx,
        "maps": maps,
        "records": records,
        "measured": measured,
        "failed": failed,
    }


def _reference_maps(scene: SceneSpec, cfg: RadarConfig, sequence: int) -> np.ndarray:
    maps = np.zeros((scene.frames_per_sequence, cfg.range_fft_points, cfg.doppler_fft_points))
    for frame in range(scene.frames_per_sequence):
        clean_beat, _ = _clean_frame(scene, cfg, sequence, frame)
        maps[frame] = clutter_filter(to_db(range_doppler_map(clean_beat))).values
    return maps


def _level_tag(level: float) -> str:
    return f"{'m' if level < 0 else 'p'}{abs(int(level)):02d}"


def _config_hash(scene: SceneSpec, cfg: RadarConfig) -> str:
    blob = json.dumps(
        {"scene": asdict(scene), "victim": asdict(cfg), "levels": list(SINR_LEVELS_DB)},
        sort_keys=True,
    ).encode()
    return hashlib.sha256(blob).hexdigest()


def split_counts(n_samples: int) -> Tuple[int, int, int]:
    """60/20/20 split sizes: val/test floored, remainder to train."""
    n_val = int(math.floor(0.2 * n_samples))
    n_test = int(math.floor(0.2 * n_samples))
    return n_samples - n_val - n_test, n_val, n_test


def augmented_frame_count(frames: int, levels: int = len(SINR_LEVELS_DB)) -> int:
    """Dataset-scale bookkeeping: every frame times every SINR level."""
    return frames * levels


def max_sample_count(frames_per_sequence: int, sequences: int = 1,
                     levels: int = len(SINR_LEVELS_DB)) -> int:
    """Non-overlapping triplet count before skips."""
    return (frames_per_sequence // 3) * levels * sequences


def synthesize_dataset(
    scene: SceneSpec,
    out_dir,
    victim: Optional[RadarConfig] = None,
    jobs: int = 1,
) -> DatasetManifest:
    """Generate, normalize and store a complete triplet dataset.

    Writes one corrupted cube per (sequence, level), one reference cube
    per sequence, and a `manifest.jsonl` whose first record carries the
    generator config, normalization statistics and counts.  Fully
    deterministic in the scene's master seed, independent of `jobs`.
    """
    cfg = victim if victim is not None else RadarConfig()
    lo, hi = scene.range_range_m
    if hi >= cfg.unambiguous_range_m:
        raise ValueError("scene range bounds exceed the unambiguous range")
    if scene.speed_range_mps[1] >= cfg.unambiguous_velocity_mps:
        raise ValueError("scene speeds exceed the unambiguous velocity")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    tasks = [
        (scene, cfg, seq, level_idx)
        for seq in range(scene.sequences)
        for level_idx in range(len(SINR_LEVELS_DB))
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_synthesize_sequence_level, tasks))
    else:
        results = [_synthesize_sequence_level(t) for t in tasks]
    by_key = {(r["sequence"], r["level_idx"]): r for r in results}
    references = {seq: _reference_maps(scene, cfg, seq) for seq in range(scene.sequences)}

    # Assemble non-overlapping triplets per (sequence, level).
    samples: List[Dict] = []
    skips: List[Dict] = []
    n_triplets = scene.frames_per_sequence // 3
    for seq in range(scene.sequences):
        for level_idx, level in enumerate(SINR_LEVELS_DB):
            r = by_key[(seq, level_idx)]
            failed = set(r["failed"])
            for i in range(n_triplets):
                frames = (3 * i, 3 * i + 1, 3 * i + 2)
                if any(f in failed for f in frames):
                    skips.append(
                        {"sequence": seq, "sinr_db": level, "frame_t": frames[2],
                         "reason": "no feasible interferer draw"}
                    )
                    continue
                samples.append(
                    {"sequence": seq, "level_idx": level_idx, "frame_t": frames[2]}
                )

    order = seeded_rng(scene.master_seed, "split").permutation(len(samples))
    n_train, n_val, n_test = split_counts(len(samples))
    split_of = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            split_of[int(idx)] = "train"
        elif rank < n_train + n_val:
            split_of[int(idx)] = "val"
        else:
            split_of[int(idx)] = "test"

    # Normalization statistics from the training-split corrupted maps.
    train_pixels = []
    for idx, s in enumerate(samples):
        if split_of[idx] != "train":
            continue
        r = by_key[(s["sequence"], s["level_idx"])]
        t = s["frame_t"]
        train_pixels.append(r["maps"][t - 2 : t + 1])
    if not train_pixels:
        raise ValueError("training split is empty; enlarge the scene")
    stats = map_stats(np.concatenate(train_pixels))

    def _norm(values: np.ndarray) -> np.ndarray:
        if stats.degenerate:
            return np.full_like(values, 0.5, dtype=np.float32)
        z = (values - stats.mean) / stats.std
        return np.clip((z - stats.z_min) / (stats.z_max - stats.z_min), 0.0, 1.0).astype(
            np.float32
        )

    # Write cubes.
    cube_names = {}
    for seq in range(scene.sequences):
        ref_name = f"seq{seq:03d}_ref.rdc"
        write_rd_cube(_norm(references[seq]), out / ref_name)
        cube_names[("ref", seq)] = ref_name
        for level_idx, level in enumerate(SINR_LEVELS_DB):
            name = f"seq{seq:03d}_sinr_{_level_tag(level)}.rdc"
            write_rd_cube(_norm(by_key[(seq, level_idx)]["maps"]), out / name)
            cube_names[(seq, level_idx)] = name

    # Manifest records.
    records: List[SampleRecord] = []
    for idx, s in enumerate(samples):
        seq, level_idx, t = s["sequence"], s["level_idx"], s["frame_t"]
        r = by_key[(seq, level_idx)]
        cube = cube_names[(seq, level_idx)]
        ref_cube = cube_names[("ref", seq)]
        records.append(
            SampleRecord(
                sample_id=f"s{idx:06d}",
                split=split_of[idx],
                sequence=seq,
                frame_t=t,
                sinr_db=SINR_LEVELS_DB[level_idx],
                measured_sinr_db=float(r["measured"][t]),
                interferer=r["records"][t],
                files={
                    "t": {"path": cube, "frame": t},
                    "t1": {"path": cube, "frame": t - 1},
                    "t2": {"path": cube, "frame": t - 2},
                    "ref": {"path": ref_cube, "frame": t},
                },
            )
        )

    n_failed = sum(len(r["failed"]) for r in results)
    counts = {
        "frames": scene.sequences * scene.frames_per_sequence,
        "augmented_frames": scene.sequences * scene.frames_per_sequence * len(SINR_LEVELS_DB)
        - n_failed,
        "samples": len(samples),
        "train": n_train,
        "val": n_val,
        "test": n_test,
        "skips": len(skips),
    }
    manifest = DatasetManifest(
        format_version=FORMAT_VERSION,
        master_seed=scene.master_seed,
        victim_config=cfg,
        scene=scene,
        config_hash=_config_hash(scene, cfg),
        counts=counts,
        normalization=stats,
        skips=tuple(skips),
    )
    with open(out / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest.as_dict(), sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec.as_dict(), sort_keys=True) + "\n")
    return manifest


def load_manifest(dataset_dir) -> Tuple[DatasetManifest, List[SampleRecord]]:
    """Parse a dataset manifest back into the header and sample records."""
    path = Path(dataset_dir) / MANIFEST_NAME
    header = None
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec["record"] == "header":
                header = rec
            elif rec["record"] == "sample":
                samples.append(
                    SampleRecord(
                        sample_id=rec["sample_id"],
                        split=rec["split"],
                        sequence=rec["sequence"],
                        frame_t=rec["frame_t"],
                        sinr_db=rec["sinr_db"],
                        measured_sinr_db=rec["measured_sinr_db"],
                        interferer=rec["interferer"],
                        files=rec["files"],
                    )
                )
    if header is None:
        raise ValueError(f"{path} contains no header record")
    manifest = DatasetManifest(
        format_version=header["format_version"],
        master_seed=header["master_seed"],
        victim_config=RadarConfig(**header["victim_config"]),
        scene=SceneSpec(
            **{
                k: tuple(v) if isinstance(v, list) else v
                for k, v in header["scene"].items()
            }
        ),
        config_hash=header["config_hash"],
        counts=header["counts"],
        normalization=NormalizationRecord.from_dict(header["normalization"]),
        skips=tuple(header["skips"]),
    )
    return manifest, samples

"""Command-line front end.

Subcommands: simulate, synthesize-dataset, mitigate, evaluate,
export-map.  All randomness flows from --seed; RDLAB_LOG sets verbosity
(debug / info / warning / error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .cube_io import read_rd_cube, write_rd_cube
from .dataset import SceneSpec, synthesize_dataset
from .evaluation import (
    METHODS,
    evaluate_dataset,
    write_metrics_csv,
    write_metrics_jsonl,
)
from .link_budget import scale_to_sinr
from .mitigation import detect_interfered_samples, imat, zeroing
from .rd_pipeline import range_axis_m, range_doppler_map, velocity_axis_mps
from .signal_model import (
    BeatFrame,
    InterfererConfig,
    RadarConfig,
    Target,
    scale_frame,
    scenario_preset,
    superimpose,
    synthesize_clean_beat,
    synthesize_interference,
)
from .detection_metrics import object_noise_cells
from .rd_pipeline import to_magnitude

log = logging.getLogger("rdlab")

_DEFAULT_TARGETS = [Target(range_m=30.0, radial_velocity_mps=10.0, rcs_m2=10.0)]


def _setup_logging() -> None:
    level = os.environ.get("RDLAB_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_config(path) -> RadarConfig:
    if path is None:
        return RadarConfig()
    return RadarConfig.from_json(Path(path).read_text(encoding="utf-8"))


def _load_targets(path):
    if path is None:
        return list(_DEFAULT_TARGETS)
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, dict):
        raw = [raw]
    return [Target(**t) for t in raw]


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    interferer = None
    if args.scenario is not None:
        cfg_preset, interferer = scenario_preset(args.scenario)
        if args.config is None:
            cfg = cfg_preset
    if args.interferer is not None:
        interferer = InterfererConfig.from_json(Path(args.interferer).read_text(encoding="utf-8"))
    targets = _load_targets(args.targets)

    clean = synthesize_clean_beat(cfg, targets, noise_seed=args.seed, include_noise=True)
    frames = []
    if interferer is not None:
        if args.sinr is not None:
            interferer = replace(interferer, amplitude_scale=None, target_sinr_db=args.sinr)
        intf = synthesize_interference(cfg, interferer)
        if interferer.target_sinr_db is not None:
            clean_map = range_doppler_map(clean)
            objects, noise_cells = object_noise_cells(to_magnitude(clean_map))
            scale = scale_to_sinr(
                clean_map, intf, interferer.target_sinr_db,
                sorted(objects.cells), sorted(noise_cells.cells),
            )
            intf = scale_frame(intf, scale)
            log.info("scaled interference by %.6g to hit %.1f dB", scale, interferer.target_sinr_db)
        frames.append(intf)
    corrupted = superimpose(clean, frames)
    write_rd_cube(corrupted.samples[None, ...], args.out)
    log.info("wrote corrupted beat frame to %s", args.out)
    return 0


def _cmd_synthesize_dataset(args) -> int:
    if args.scene is not None:
        raw = json.loads(Path(args.scene).read_text(encoding="utf-8"))
        raw = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()}
        scene = SceneSpec(**raw)
    else:
        scene = SceneSpec()
    if args.seed is not None:
        scene = replace(scene, master_seed=args.seed)
    manifest = synthesize_dataset(scene, args.out_dir, jobs=args.jobs)
    log.info("dataset counts: %s", manifest.counts)
    print(json.dumps(manifest.counts))
    return 0


def _cmd_mitigate(args) -> int:
    cfg = _load_config(args.config)
    frames = read_rd_cube(getattr(args, "in"))
    if not np.iscomplexobj(frames):
        raise ValueError("mitigation expects a complex beat cube (kind 0)")
    out_frames = []
    for samples in frames:
        frame = BeatFrame(samples.astype(np.complex128), cfg, "corrupted")
        mask = detect_interfered_samples(frame, k_sigma=args.k_sigma)
        if args.method == "zeroing":
            result = zeroing(frame, mask)
        else:
            result = imat(frame, mask, iterations=args.iters, decay=args.decay)
        out_frames.append(result.samples)
    write_rd_cube(np.array(out_frames), args.out)
    log.info("wrote %d mitigated frame(s) to %s", len(out_frames), args.out)
    return 0


def _cmd_evaluate(args) -> int:
    split = None if args.split == "all" else args.split
    rows = evaluate_dataset(
        args.dataset,
        args.method,
        split=split,
        denoised_dir=args.denoised_dir,
        k_sigma=args.k_sigma,
        imat_iterations=args.iters,
        imat_decay=args.decay,
    )
    write_metrics_csv(rows, args.report)
    if args.report_jsonl is not None:
        write_metrics_jsonl(rows, args.report_jsonl)
    medians = {
        "sinr_db": float(np.median([r.sinr_db for r in rows])) if rows else float("nan"),
        "evm": float(np.median([r.evm for r in rows])) if rows else float("nan"),
        "ap_percent": float(np.median([r.ap_percent for r in rows])) if rows else float("nan"),
    }
    print(json.dumps({"method": args.method, "samples": len(rows), "median": medians}))
    return 0


def _cmd_export_map(args) -> int:
    cfg = _load_config(args.config)
    frames = read_rd_cube(getattr(args, "in"))
    if not 0 <= args.frame < frames.shape[0]:
        raise ValueError(f"frame {args.frame} outside cube with {frames.shape[0]} frame(s)")
    frame = frames[args.frame]
    if np.iscomplexobj(frame):
        values = 20.0 * np.log10(np.abs(frame.astype(np.complex128)) + 1e-12)
    else:
        values = frame.astype(float)
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo if hi > lo else 1.0
    grey = np.round((values - lo) / span * 65535.0).astype(">u2")
    with open(args.out_pgm, "wb") as fh:
        fh.write(f"P5\n{grey.shape[1]} {grey.shape[0]}\n65535\n".encode("ascii"))
        fh.write(grey.tobytes())
    with open(args.out_axes, "w", encoding="utf-8", newline="") as fh:
        fh.write("axis,bin,value\n")
        ranges = range_axis_m(cfg)
        velocities = velocity_axis_mps(cfg)
        for i in range(values.shape[0]):
            r = ranges[i] if i < len(ranges) else i * (ranges[1] - ranges[0])
            fh.write(f"range_m,{i},{r:.6f}\n")
        for j in range(values.shape[1]):
            v = velocities[j] if j < len(velocities) else 0.0
            fh.write(f"velocity_mps,{j},{v:.6f}\n")
    log.info("wrote %s and %s (dB span %.1f..%.1f)", args.out_pgm, args.out_axes, lo, hi)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdlab",
        description="FMCW radar interference laboratory: simulation, datasets, "
        "mitigation and metrics",
    )
    parser.add_argument("--version", action="version", version=f"rdlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize one corrupted beat frame")
    sim.add_argument("--config", help="victim RadarConfig JSON file")
    sim.add_argument("--targets", help="JSON file with a list of targets")
    sim.add_argument("--scenario", type=int, choices=range(1, 8),
                     help="qualitative interference scenario 1..7")
    sim.add_argument("--interferer", help="InterfererConfig JSON file")
    sim.add_argument("--sinr", type=float, help="scale interference to this SINR [dB]")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output RDC1 beat cube")
    sim.set_defaults(func=_cmd_simulate)

    synth = sub.add_parser("synthesize-dataset", help="generate a triplet dataset")
    synth.add_argument("--scene", help="SceneSpec JSON file")
    synth.add_argument("--out-dir", required=True)
    synth.add_argument("--jobs", type=int, default=1)
    synth.add_argument("--seed", type=int, help="override the scene master seed")
    synth.set_defaults(func=_cmd_synthesize_dataset)

    mit = sub.add_parser("mitigate", help="apply zeroing or IMAT to a beat cube")
    mit.add_argument("--in", required=True, help="input RDC1 complex beat cube")
    mit.add_argument("--method", required=True, choices=("zeroing", "imat"))
    mit.add_argument("--k-sigma", type=float, default=4.0)
    mit.add_argument("--iters", type=int, default=10)
    mit.add_argument("--decay", type=float, default=0.7)
    mit.add_argument("--config", help="victim RadarConfig JSON file")
    mit.add_argument("--out", required=True)
    mit.set_defaults(func=_cmd_mitigate)

    ev = sub.add_parser("evaluate", help="score a method over a dataset split")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--method", required=True, choices=METHODS)
    ev.add_argument("--split", default="test", choices=("train", "val", "test", "all"))
    ev.add_argument("--denoised-dir", help="directory of <sample_id>.rdc denoised maps")
    ev.add_argument("--k-sigma", type=float, default=4.0)
    ev.add_argument("--iters", type=int, default=10)
    ev.add_argument("--decay", type=float, default=0.7)
    ev.add_argument("--report", required=True, help="output CSV path")
    ev.add_argument("--report-jsonl", help="optional line-delimited JSON log")
    ev.set_defaults(func=_cmd_evaluate)

    exp = sub.add_parser("export-map", help="export a map as 16-bit PGM plus axis scales")
    exp.add_argument("--in", required=True, help="input RDC1 cube")
    exp.add_argument("--frame", type=int, default=0)
    exp.add_argument("--config", help="victim RadarConfig JSON file")
    exp.add_argument("--out-pgm", required=True)
    exp.add_argument("--out-axes", required=True)
    exp.set_defaults(func=_cmd_export_map)

    return parser


def dispatch(argv) -> int:
    """Run one subcommand; returns the process exit code."""
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as exit 1 with a diagnostic
        log.error("%s", exc)
        print(f"rdlab: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

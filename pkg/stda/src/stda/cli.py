"""Command-line front end: train, denoise, audit."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .denoise import denoise_dataset
from .model import StdaConfig, StdaNet, parameter_count
from .train import TrainConfig, train


def _cmd_train(args) -> int:
    train_cfg = TrainConfig(seed=args.seed)
    if args.epochs is not None:
        train_cfg = replace(train_cfg, epochs=args.epochs)
    if args.batch_size is not None:
        train_cfg = replace(train_cfg, batch_size=args.batch_size)
    if args.lr is not None:
        train_cfg = replace(train_cfg, learning_rate=args.lr)
    history = train(
        args.dataset, args.out, StdaConfig(), train_cfg,
        log_path=args.log,
    )
    best = min(history, key=lambda h: h["val_loss"])
    print(json.dumps({"epochs": len(history), "best_epoch": best["epoch"],
                      "best_val_loss": best["val_loss"]}))
    return 0


def _cmd_denoise(args) -> int:
    count = denoise_dataset(args.checkpoint, args.dataset, args.out_dir, split=args.split)
    print(json.dumps({"denoised": count, "out_dir": args.out_dir}))
    return 0


def _cmd_audit(args) -> int:
    model = StdaNet(StdaConfig())
    print(json.dumps({
        "parameters": parameter_count(model),
        "input_shape": [3, 128, 64],
        "output_shape": [1, 128, 64],
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stda", description="spatio-temporal denoising autoencoder for RD maps"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="fit the denoiser on a triplet dataset")
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--out", required=True, help="checkpoint path")
    tr.add_argument("--log", help="CSV loss log path")
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--batch-size", type=int)
    tr.add_argument("--lr", type=float)
    tr.add_argument("--seed", type=int, default=0)
    tr.set_defaults(func=_cmd_train)

    de = sub.add_parser("denoise", help="write denoised maps for a split")
    de.add_argument("--checkpoint", required=True)
    de.add_argument("--dataset", required=True)
    de.add_argument("--out-dir", required=True)
    de.add_argument("--split", default="test", choices=("train", "val", "test"))
    de.set_defaults(func=_cmd_denoise)

    au = sub.add_parser("audit", help="print the parameter/shape audit")
    au.set_defaults(func=_cmd_audit)
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except Exception as exc:
        print(f"stda: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

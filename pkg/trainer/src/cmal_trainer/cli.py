"""Trainer CLI: train, export, probe."""

from __future__ import annotations

import argparse
import json
import sys

from cmal_trainer import TrainerError
from cmal_trainer.config import TrainConfig, load_config
from cmal_trainer.data import load_dataset
from cmal_trainer.latents import export_latents
from cmal_trainer.probe import invariance_probe
from cmal_trainer.training import load_checkpoint, train


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else TrainConfig()
    dataset = load_dataset(args.manifest, config)
    _, log = train(config, dataset, out_dir=args.out)
    last = log[-1]
    print(
        f"trained {config.epochs} epochs: recon={last['recon']:.5f} "
        f"class_acc={last['class_acc']:.3f} (checkpoint in {args.out})"
    )
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    bundle = load_checkpoint(args.checkpoint)
    count = export_latents(bundle, args.manifest, args.out)
    print(f"wrote {count} x {bundle.config.latent_dim} latents to {args.out}")
    return 0


def cmd_probe(args: argparse.Namespace) -> int:
    bundle = load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.manifest, bundle.config)
    result = invariance_probe(bundle, dataset, k=args.k)
    print(json.dumps(result, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmal-trainer",
        description="Train the condition-directed adversarial feature learner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train on condition-labeled manifests")
    p_train.add_argument("--config", help="TrainConfig JSON")
    p_train.add_argument("--manifest", action="append", required=True,
                         help="manifest path (repeat per condition)")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.set_defaults(func=cmd_train)

    p_export = sub.add_parser("export", help="export latent codes for a manifest")
    p_export.add_argument("--checkpoint", required=True)
    p_export.add_argument("--manifest", required=True)
    p_export.add_argument("--out", required=True, help="latent interchange file")
    p_export.set_defaults(func=cmd_export)

    p_probe = sub.add_parser("probe", help="cross-condition invariance probe")
    p_probe.add_argument("--checkpoint", required=True)
    p_probe.add_argument("--manifest", action="append", required=True)
    p_probe.add_argument("--k", type=int, default=5)
    p_probe.set_defaults(func=cmd_probe)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TrainerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: train one phase, or decode predictions."""

from __future__ import annotations

import argparse
import sys

from .data import SchemaError
from .harness import DEFAULT_BATCH_SIZE, PHASES, TrainSpec, predict, train
from .model import PRESETS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defmod-trainer",
        description="Fine-tune a small encoder-decoder on model-ready files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one phase and write a checkpoint")
    p.add_argument("--train", required=True, help="model-ready JSON-Lines file")
    p.add_argument("--phase", choices=PHASES, default="sdm_finetune")
    p.add_argument("--model", choices=sorted(PRESETS), default="tiny")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    p.add_argument("--lr", type=float, default=None,
                   help="default 1e-4 for mdm_pretrain, 3e-4 for sdm_finetune")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--init-checkpoint", default=None,
                   help="phase-1 checkpoint to continue from")
    p.add_argument("-o", "--output", required=True, help="checkpoint directory")
    p.set_defaults(run=_run_train)

    p = sub.add_parser("predict", help="greedy-decode predictions for a file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="JSON-Lines with source fields")
    p.add_argument("--output", required=True, help="predictions JSON-Lines")
    p.add_argument("--max-new-tokens", type=int, default=64)
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    p.set_defaults(run=_run_predict)
    return parser


def _run_train(args) -> int:
    spec = TrainSpec(
        train_path=args.train,
        out_dir=args.output,
        phase=args.phase,
        model=args.model,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        dropout=args.dropout,
        init_checkpoint=args.init_checkpoint,
    )
    out_dir, curve = train(spec)
    print(f"checkpoint -> {out_dir} "
          f"(loss {curve[0]['loss']:.4f} -> {curve[-1]['loss']:.4f})")
    return 0


def _run_predict(args) -> int:
    count = predict(
        args.checkpoint,
        args.input,
        args.output,
        max_new_tokens=args.max_new_tokens,
        batch_size=args.batch_size,
    )
    print(f"wrote {count} predictions -> {args.output}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

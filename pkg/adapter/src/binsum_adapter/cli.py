"""Command line front end: `binsum-adapter prepare` and `binsum-adapter predict`."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from binsum_adapter.config import KNOWN_VARIANTS, TrainConfig
from binsum_adapter.data import AdapterError, prepare, read_pairs
from binsum_adapter.predict import EchoModel, RetrievalModel, generate_predictions

_MODELS = ("echo", "retrieval")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binsum-adapter",
        description="Prepare seq2seq pair files from a code-summary corpus and collect predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="write train/valid/test pair files from samples + split")
    p.add_argument("--samples", required=True, help="samples.jsonl path")
    p.add_argument("--split", required=True, help="split.json path")
    p.add_argument("--variant", required=True, choices=KNOWN_VARIANTS)
    p.add_argument("--out-dir", required=True, help="directory for the pair files")
    p.add_argument("--model-name", default=TrainConfig.model_name)
    p.add_argument("--max-source-tokens", type=int, default=TrainConfig.max_source_tokens)
    p.add_argument("--max-source-tokens-c", type=int, default=TrainConfig.max_source_tokens_c)
    p.add_argument("--max-target-tokens", type=int, default=TrainConfig.max_target_tokens)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--grad-accum-steps", type=int, default=TrainConfig.grad_accum_steps)

    p = sub.add_parser("predict", help="run a built-in predictor over a pair file")
    p.add_argument("--pairs", required=True, help="pair file to predict on (e.g. test.jsonl)")
    p.add_argument("--model", default="retrieval", choices=_MODELS)
    p.add_argument("--train", help="training pair file (required for --model retrieval)")
    p.add_argument("-o", "--output", required=True, help="predictions.jsonl path")
    return parser


def _cmd_prepare(args: argparse.Namespace) -> int:
    cfg = TrainConfig(
        model_name=args.model_name,
        max_source_tokens=args.max_source_tokens,
        max_source_tokens_c=args.max_source_tokens_c,
        max_target_tokens=args.max_target_tokens,
        batch_size=args.batch_size,
        grad_accum_steps=args.grad_accum_steps,
    )
    report = prepare(
        args.samples, args.split, args.out_dir, variant=args.variant, config=cfg
    )
    print(json.dumps(report.to_json(), sort_keys=True))
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    pairs = read_pairs(args.pairs)
    if args.model == "echo":
        model = EchoModel(pairs)
    else:
        if not args.train:
            raise AdapterError("--model retrieval requires --train")
        model = RetrievalModel(read_pairs(args.train))
    count = generate_predictions(pairs, model, args.output)
    print(json.dumps({"predictions": count, "model": args.model}, sort_keys=True))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "prepare":
            return _cmd_prepare(args)
        return _cmd_predict(args)
    except (AdapterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

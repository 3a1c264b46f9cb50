"""Command-line entry point.

    extract-embeddings --manifest real/train.jsonl --modality visual \
        --out real_visual.vldg
    extract-embeddings --manifest real/train.jsonl --modality linguistic \
        --model bert-base-uncased --pooling cls --out real_linguistic.vldg
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .encoders import ExtractorConfig
from .extract import extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract-embeddings",
        description="Export visual (ResNet) or linguistic (BERT) features from a "
                    "dataset manifest to a VLDG embedding file.",
    )
    parser.add_argument("--version", action="version",
                        version=f"extract-embeddings {__version__}")
    parser.add_argument("--manifest", required=True,
                        help="dataset manifest (JSONL, one style domain)")
    parser.add_argument("--modality", required=True, choices=["visual", "linguistic"])
    parser.add_argument("--out", required=True, help="output .vldg path")
    parser.add_argument("--model", default="",
                        help="encoder name (default: resnet50 / bert-base-uncased)")
    parser.add_argument("--pooling", default="",
                        help="visual: gap; linguistic: cls or mean")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--weights", default="pretrained",
                        choices=["pretrained", "random"],
                        help="random = seeded architecture-only init, runs offline")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--vocab",
                        help="vocab file for the offline tokenizer (random weights)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExtractorConfig(
        modality=args.modality,
        model_name=args.model,
        pooling=args.pooling,
        batch_size=args.batch_size,
        device=args.device,
        weights=args.weights,
        seed=args.seed,
        vocab_file=args.vocab,
    )
    try:
        count, dim = extract(args.manifest, cfg, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}: {count} x {dim} ({args.modality}, {cfg.model_name})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

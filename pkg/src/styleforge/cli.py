"""Command-line entry point.

    forge stylize  --task cap --style cartoon --input manifest.jsonl --out work/
    forge annotate --task cap --style cartoon --input manifest.jsonl \
                   --stylized work/ --out work/
    forge assemble --task cap --style cartoon --input manifest.jsonl \
                   --work work/ --out dataset/
    forge stats    --data dataset/cap [--format text|json|csv]
    forge mmd      --visual dir/ --linguistic dir/ --kernel rbf \
                   --estimator biased --out gaps.json
    forge validate <manifest.jsonl | dataset-root>

Exit codes: 0 success, 2 config, 3 io, 4 provider, 5 validation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from .corpus import Task, read_corpus
from .dataset import compute_stats, read_manifest, render_stats
from .errors import ConfigError, ForgeError, ProviderError, SchemaError
from .mmd import Estimator, KernelSpec, Modality, gap_matrix, read_embeddings
from .promptkit.styles import Style
from .promptkit.templates import load_templates
from .runs import RunSummary, run_annotate, run_assemble, run_stylize, write_run_report

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_PROVIDER = 4
EXIT_VALIDATION = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Forge stylized vision-language datasets with verified annotations.",
    )
    parser.add_argument("--version", action="version", version=f"forge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, provider=True):
        p.add_argument("--config", help="YAML/JSON config file")
        p.add_argument("--input", required=True, help="source corpus manifest (JSONL)")
        p.add_argument("--task", required=True, choices=[t.value for t in Task])
        p.add_argument("--style", action="append",
                       choices=[s.slug for s in Style.targets()],
                       help="target style; repeatable (default: all three)")
        if provider:
            p.add_argument("--patience", type=int, help="semantic failures tolerated per unit")
            p.add_argument("--jobs", type=int, help="concurrent units")
            p.add_argument("--replay", metavar="SESSION",
                           help="serve provider responses from a recorded session file")
            p.add_argument("--record", metavar="SESSION",
                           help="record live responses into a session file")
            p.add_argument("--fresh-context", action="store_true", default=None,
                           help="one provider context per call instead of one per unit")
            p.add_argument("--templates-dir", help="override the built-in prompt templates")
            p.add_argument("--quiet", action="store_true", help="suppress progress lines")

    p_sty = sub.add_parser("stylize", help="generate verified stylized images")
    add_common(p_sty)
    p_sty.add_argument("--out", required=True, help="working directory")

    p_ann = sub.add_parser("annotate", help="annotate stylized images for their task")
    add_common(p_ann)
    p_ann.add_argument("--stylized", required=True, help="stylize working directory")
    p_ann.add_argument("--out", required=True, help="output directory (may equal --stylized)")

    p_asm = sub.add_parser("assemble", help="assemble the final dataset layout")
    add_common(p_asm, provider=False)
    p_asm.add_argument("--work", required=True, help="annotate output directory")
    p_asm.add_argument("--stylized",
                       help="stylize working directory when it differs from --work")
    p_asm.add_argument("--out", required=True, help="dataset root")

    p_stats = sub.add_parser("stats", help="per-style/split counts and label histograms")
    p_stats.add_argument("--data", required=True, help="assembled task dataset root")
    p_stats.add_argument("--format", default="text", choices=["text", "json", "csv"])
    p_stats.add_argument("--out", help="write the report here instead of stdout")

    p_mmd = sub.add_parser("mmd", help="pairwise domain gaps from embedding files")
    p_mmd.add_argument("--visual", required=True, help="directory of visual .vldg files")
    p_mmd.add_argument("--linguistic", required=True,
                       help="directory of linguistic .vldg files")
    p_mmd.add_argument("--kernel", default="rbf", choices=["rbf", "linear"])
    p_mmd.add_argument("--bandwidth", type=float,
                       help="explicit RBF bandwidth (default: median heuristic)")
    p_mmd.add_argument("--estimator", default="biased", choices=["biased", "unbiased"])
    p_mmd.add_argument("--out", help="write the gap matrix JSON here")

    p_val = sub.add_parser("validate", help="validate a source manifest or dataset root")
    p_val.add_argument("path", help="JSONL source manifest or assembled task root")

    return parser


def _styles(args) -> list[Style]:
    slugs = args.style or [s.slug for s in Style.targets()]
    return [Style.from_slug(s) for s in slugs]


def _load_run_config(args) -> RunConfig:
    overrides = {
        "patience": getattr(args, "patience", None),
        "jobs": getattr(args, "jobs", None),
        "replay_session": getattr(args, "replay", None),
        "record_session": getattr(args, "record", None),
        "fresh_context": getattr(args, "fresh_context", None),
        "templates_dir": getattr(args, "templates_dir", None),
    }
    return load_config(args.config, overrides=overrides)


def _progress(args):
    if getattr(args, "quiet", False):
        return None
    return lambda line: print(line, file=sys.stderr)


def cmd_stylize(args) -> int:
    cfg = _load_run_config(args)
    items = read_corpus(args.input, task=Task.from_slug(args.task))
    templates = load_templates(cfg.templates_dir)
    provider = cfg.make_provider()
    interrupted = False
    summary = RunSummary()
    try:
        summary = run_stylize(items, _styles(args), cfg.pipeline(), provider,
                              templates, args.out, jobs=cfg.jobs,
                              progress=_progress(args))
    except KeyboardInterrupt:
        interrupted = True
    finally:
        if cfg.record_session:
            provider.save()
        write_run_report(
            args.out, command="stylize", config_snapshot=cfg.snapshot(),
            summary=summary, cost_total_usd=provider.ledger.total_usd,
            provider_calls=len(provider.ledger), interrupted=interrupted,
        )
    return 130 if interrupted else 0


def cmd_annotate(args) -> int:
    cfg = _load_run_config(args)
    items = read_corpus(args.input, task=Task.from_slug(args.task))
    templates = load_templates(cfg.templates_dir)
    provider = cfg.make_provider()
    interrupted = False
    summary = RunSummary()
    try:
        summary = run_annotate(items, _styles(args), cfg.pipeline(), provider,
                               templates, args.stylized, args.out, jobs=cfg.jobs,
                               progress=_progress(args))
    except KeyboardInterrupt:
        interrupted = True
    finally:
        if cfg.record_session:
            provider.save()
        write_run_report(
            args.out, command="annotate", config_snapshot=cfg.snapshot(),
            summary=summary, cost_total_usd=provider.ledger.total_usd,
            provider_calls=len(provider.ledger), interrupted=interrupted,
        )
    return 130 if interrupted else 0


def cmd_assemble(args) -> int:
    cfg = load_config(args.config)
    task = Task.from_slug(args.task)
    items = read_corpus(args.input, task=task)
    manifest = run_assemble(
        items, task, _styles(args), args.work, args.out,
        stylized_dir=args.stylized,
        provenance={
            "patience": cfg.patience,
            "chat_model_id": cfg.chat_model_id,
            "image_model_id": cfg.image_model_id,
            "caption_count": cfg.caption_count,
        },
    )
    summary = RunSummary(emitted=len(manifest.records))
    write_run_report(
        Path(args.out) / task.value, command="assemble",
        config_snapshot=cfg.snapshot(), summary=summary,
        cost_total_usd=0.0, provider_calls=0,
    )
    print(f"assembled {len(manifest.records)} records under "
          f"{Path(args.out) / task.value}")
    return 0


def cmd_stats(args) -> int:
    manifest = read_manifest(args.data, check_images=False)
    report = render_stats(compute_stats(manifest), args.format)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    else:
        print(report, end="")
    return 0


def _load_embedding_dir(directory: str, modality: Modality) -> dict:
    sets = {}
    for path in sorted(Path(directory).glob("*.vldg")):
        emb = read_embeddings(path)
        if emb.modality is not modality:
            continue
        if emb.domain in sets:
            raise SchemaError(f"duplicate {modality.value} embeddings for domain "
                              f"{emb.domain.slug} ({path})")
        sets[emb.domain] = emb
    return sets


def cmd_mmd(args) -> int:
    kernel = KernelSpec(kind=args.kernel, bandwidth=args.bandwidth)
    estimator = Estimator(args.estimator)
    visual = _load_embedding_dir(args.visual, Modality.VISUAL)
    linguistic = _load_embedding_dir(args.linguistic, Modality.LINGUISTIC)
    matrix = gap_matrix(visual, linguistic, kernel, estimator)
    doc = json.dumps(matrix.to_json(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
    print(matrix.render_text(), end="")
    return 0


def cmd_validate(args) -> int:
    path = Path(args.path)
    if path.is_dir():
        manifest = read_manifest(path, check_images=True)
        print(f"ok: {len(manifest.records)} records, task={manifest.task.value}")
    else:
        items = read_corpus(path, check_images=True)
        print(f"ok: {len(items)} source items")
    return 0


_COMMANDS = {
    "stylize": cmd_stylize,
    "annotate": cmd_annotate,
    "assemble": cmd_assemble,
    "stats": cmd_stats,
    "mmd": cmd_mmd,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

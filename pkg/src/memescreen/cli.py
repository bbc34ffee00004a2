"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime failure (including any
failed item in a batch and single-class labels in ``eval``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import AppConfig, load_config
from .core import Language, MemeInput, validate_meme_input
from .errors import MemeScreenError, UsageError

log = logging.getLogger("memescreen")

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".webp", ".bmp", ".gif"}
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n\n{self.format_usage()}")


def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML config file (defaults: all-mock stack)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memescreen", description="Harmful meme scoring pipeline.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("score", help="score one image and print a JSON result")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--id", help="meme id (default: file stem)")
    _add_config(p)

    p = sub.add_parser("batch", help="score many images into a prediction CSV")
    p.add_argument("--images", type=Path, nargs="+", required=True, help="image files and/or directories")
    p.add_argument("--out", type=Path, required=True, help="prediction CSV (id,probability,label)")
    p.add_argument("--failures", type=Path, help="write failed items as JSON lines here")
    p.add_argument("--parallelism", type=int)
    _add_config(p)

    p = sub.add_parser("eval", help="AUROC and accuracy of a prediction CSV")
    p.add_argument("--preds", type=Path, required=True)
    p.add_argument("--labels", type=Path, required=True, help="CSV with id,label")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--json", type=Path, help="also write the JSON report here")

    p = sub.add_parser("gen-ocr-data", help="render a synthetic OCR dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n", type=int, required=True, help="samples per language")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--corpus",
        action="append",
        default=[],
        metavar="LANG=PATH",
        help="corpus file per language (repeatable); default: bundled sample corpora",
    )
    p.add_argument("--parallelism", type=int, default=1)
    _add_config(p)

    p = sub.add_parser("gen-distill-data", help="build chat-style distillation examples")
    p.add_argument("--images", type=Path, nargs="+", required=True)
    p.add_argument("--verdicts", type=Path, help="JSON lines {id, verdict, rationale}; default: configured annotator")
    p.add_argument("--out", type=Path, required=True)
    _add_config(p)

    p = sub.add_parser("sweep-temp", help="AUROC/accuracy over a temperature grid")
    p.add_argument("--logits", type=Path, required=True, help="CSV with id,logit_yes,logit_no")
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--grid", default="0.25,0.5,1,2,4", help="comma-separated temperatures")
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("serve", help="run the HTTP scoring service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    _add_config(p)
    return parser


def _config(args) -> AppConfig:
    return load_config(getattr(args, "config", None))


def _load_image(path: Path, meme_id: Optional[str] = None) -> MemeInput:
    return validate_meme_input(path.read_bytes(), meme_id or path.stem, source_path=str(path))


def _collect_images(paths: Sequence[Path]) -> list[Path]:
    files = []
    for p in paths:
        if p.is_dir():
            files.extend(sorted(f for f in p.iterdir() if f.suffix.lower() in IMAGE_SUFFIXES))
        elif p.exists():
            files.append(p)
        else:
            raise UsageError(f"no such file or directory: {p}")
    return files


def cmd_score(args) -> int:
    from .pipeline import score_one

    cfg = _config(args)
    meme = _load_image(args.image, args.id)
    backends = cfg.build_backends()
    try:
        result = score_one(meme, backends, cfg.pipeline_config())
    finally:
        backends.close()
    out = result.to_dict()
    keys = ("id", "probability", "label", "caption", "text", "language", "translated_text")
    print(json.dumps({k: out[k] for k in keys}, ensure_ascii=False))
    return EXIT_OK


def cmd_batch(args) -> int:
    from .pipeline import BatchFailure, PredictionWriter, iter_batch

    cfg = _config(args)
    memes = [_load_image(p) for p in _collect_images(args.images)]
    parallelism = args.parallelism or cfg.parallelism
    backends = cfg.build_backends()
    failures = []
    n_ok = 0
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = PredictionWriter(fh)
            for outcome, _ in iter_batch(memes, backends, cfg.pipeline_config(), parallelism):
                if isinstance(outcome, BatchFailure):
                    failures.append(outcome)
                    print(json.dumps(outcome.to_dict()), file=sys.stderr)
                else:
                    writer.write(outcome)
                    n_ok += 1
    finally:
        backends.close()
    if args.failures:
        with open(args.failures, "w", encoding="utf-8") as fh:
            for f in failures:
                fh.write(json.dumps(f.to_dict()) + "\n")
    print(json.dumps({"scored": n_ok, "failed": len(failures), "out": str(args.out)}))
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_eval(args) -> int:
    from .evalharness import evaluate_files

    report = evaluate_files(args.preds, args.labels, args.threshold)
    if args.json:
        args.json.write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.to_json())
    print(report.table(), file=sys.stderr)
    return EXIT_OK


def _parse_corpora(specs: Sequence[str]) -> dict:
    from .datagen import bundled_corpora

    if not specs:
        return bundled_corpora()
    out = {}
    for spec in specs:
        lang, sep, path = spec.partition("=")
        if not sep or lang.upper() not in Language.__members__:
            raise UsageError(f"--corpus expects LANG=PATH with LANG in ENGLISH/CHINESE/MALAY/TAMIL, got {spec!r}")
        out[Language[lang.upper()]] = Path(path)
    return out


def cmd_gen_ocr_data(args) -> int:
    from .datagen import FontRegistry, HttpBackgroundProvider, ProceduralProvider, build_ocr_dataset, default_registry

    cfg = _config(args)
    dg = cfg.datagen
    size = (dg.image_width, dg.image_height)
    fonts = default_registry()
    for lang, paths in dg.fonts.items():
        for path in paths if isinstance(paths, list) else [paths]:
            fonts.register(Language[lang], path)
    provider = HttpBackgroundProvider(dg.background_endpoint, size) if dg.background_endpoint else ProceduralProvider(size)
    manifest = build_ocr_dataset(
        _parse_corpora(args.corpus),
        args.n,
        args.out,
        seed=args.seed,
        provider=provider,
        fonts=fonts,
        size_range=(dg.size_min, dg.size_max),
        parallelism=args.parallelism,
    )
    print(json.dumps({"manifest": str(manifest.path), "samples": len(manifest)}))
    return EXIT_OK


def cmd_gen_distill_data(args) -> int:
    from .datagen import annotate_memes, build_distill_dataset, read_verdicts, write_chat_jsonl
    from .errors import MalformedVerdict

    cfg = _config(args)
    memes = [_load_image(p) for p in _collect_images(args.images)]
    backends = cfg.build_backends()
    try:
        if args.verdicts:
            verdicts = read_verdicts(args.verdicts)
            missing = [m.id for m in memes if m.id not in verdicts]
            if missing:
                raise MalformedVerdict(f"no verdict for {len(missing)} memes, e.g. {missing[:3]}")
            pairs = [(m, verdicts[m.id]) for m in memes]
        else:
            pairs = annotate_memes(memes, backends.annotator)
        examples = build_distill_dataset(pairs, backends, cfg.template(), cfg.pipeline_config().cascade)
    finally:
        backends.close()
    write_chat_jsonl(examples, args.out)
    print(json.dumps({"examples": len(examples), "out": str(args.out)}))
    return EXIT_OK


def cmd_sweep_temp(args) -> int:
    from .evalharness import read_labels, read_logits, sweep_table, temperature_sweep

    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--grid must be comma-separated numbers: {exc}") from exc
    logits = read_logits(args.logits)
    labels = read_labels(args.labels)
    missing = [i for i in logits if i not in labels]
    if missing:
        from .errors import LabelMismatch

        raise LabelMismatch(f"{len(missing)} ids have no label, e.g. {missing[:3]}")
    ids = list(logits)
    rows = temperature_sweep([logits[i] for i in ids], [labels[i] for i in ids], grid, args.threshold)
    print(json.dumps([{"t": r.temperature, "auroc": r.auroc, "accuracy": r.accuracy} for r in rows]))
    print(sweep_table(rows), file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    cfg = _config(args)
    if args.host:
        cfg.service.host = args.host
    if args.port:
        cfg.service.port = args.port
    serve(cfg)
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "batch": cmd_batch,
    "eval": cmd_eval,
    "gen-ocr-data": cmd_gen_ocr_data,
    "gen-distill-data": cmd_gen_distill_data,
    "sweep-temp": cmd_sweep_temp,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except MemeScreenError as exc:
        print(json.dumps({"error": exc.to_dict()}), file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": {"code": type(exc).__name__, "message": str(exc)}}), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

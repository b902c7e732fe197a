"""Command-line driver.

Exit codes: 0 success, 2 bad input (missing file, schema or structure
error), 1 internal error. Results go to stdout as JSON unless ``--out`` is
given; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import formats
from .errors import DocstructError
from .evaluation import (
    COCO_IOU_THRESHOLDS,
    DEFAULT_MAX_TOKENS,
    SINGLE_IOU_THRESHOLDS,
    EvalReport,
    kie_scores,
    mean_ap,
    score_samples,
)
from .evaluation.table import mean
from .geometry import OrderConfig, sort_tb_yx, sort_yx
from .recovery import DocumentModel, TableBlock, build_document, emit_html, emit_markdown
from .table import (
    MERGED,
    SPLIT,
    TokenSequence,
    grid_to_tokens,
    merge_td_tokens,
    parse_html_table,
    split_td_tokens,
    table_to_html,
    tokens_to_grid,
)

log = logging.getLogger("docstruct")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("DOCSTRUCT_THREADS", "").strip()
        value = int(env) if env else 1
    if value < 0:
        raise InputError("--threads must be >= 0")
    return value or (os.cpu_count() or 1)


def _existing(path: str) -> str:
    if not Path(path).is_file():
        raise InputError(f"no such file: {path}")
    return path


def _emit_report(report: EvalReport, args) -> None:
    if args.out:
        formats.write_report(report, args.out, args.format)
    elif args.format == "text":
        sys.stdout.write(formats.report_to_text(report))
    else:
        sys.stdout.write(formats.report_to_json(report))


def _threshold_config(th: str) -> OrderConfig:
    if th == "auto":
        return OrderConfig()
    try:
        return OrderConfig.fixed(float(th))
    except ValueError as exc:
        raise InputError(f"--th must be 'auto' or a non-negative number, got {th!r}") from exc


def cmd_eval_layout(args) -> int:
    pred, gt = _existing(args.pred), _existing(args.gt)
    dets = formats.read_detections(pred)
    gts = formats.read_gt_boxes(gt)
    thresholds = COCO_IOU_THRESHOLDS if args.iou == "coco" else SINGLE_IOU_THRESHOLDS
    value, per_class = mean_ap(dets, gts, thresholds)
    report = EvalReport(
        task="layout",
        protocol={"iou": args.iou, "iou_thresholds": list(thresholds)},
        map=value,
        per_class_ap=per_class,
    )
    _emit_report(report, args)
    return EXIT_OK


def cmd_eval_table(args) -> int:
    pred_path, gt_path = _existing(args.pred), _existing(args.gt)
    strict = not args.lenient
    diagnostics: list[formats.Diagnostic] = []
    preds: dict[str, formats.TableAnnotationRecord] = {}
    for rec in formats.read_table_jsonl(pred_path, strict, diagnostics, check_vocab=False):
        if rec.filename in preds:
            log.warning("%s:%d: duplicate prediction for %s, keeping the last", rec.path, rec.line, rec.filename)
        preds[rec.filename] = rec
    samples = []
    seen = set()
    for rec in formats.read_table_jsonl(gt_path, strict, diagnostics):
        if rec.filename in seen:
            raise InputError(f"{rec.path}:{rec.line}: duplicate ground truth for {rec.filename}")
        seen.add(rec.filename)
        samples.append(formats.table_sample(rec, preds.get(rec.filename)))
    for d in diagnostics:
        log.warning("skipped %s", d)
    unmatched = sorted(set(preds) - seen)
    if unmatched:
        log.warning("%d predictions have no ground truth (first: %s)", len(unmatched), unmatched[0])

    results = score_samples(samples, args.max_tokens, args.struct_only, resolve_threads(args.threads))
    evaluated = [r for r in results if not r.skipped]
    report = EvalReport(
        task="table",
        protocol={"max_tokens": args.max_tokens, "struct_only": args.struct_only, "vocabulary": MERGED},
        structure_accuracy=(sum(r.exact_match for r in evaluated) / len(evaluated)) if evaluated else 0.0,
        n_evaluated=len(evaluated),
        n_skipped=len(results) - len(evaluated),
        mean_teds=None if args.struct_only else mean(r.teds for r in results),
        mean_teds_struct=mean(r.teds_struct for r in results),
        n_pred_failed=sum(r.pred_failed for r in results),
        per_sample=[
            {k: v for k, v in {
                "sample_id": r.sample_id,
                "gt_length": r.gt_length,
                "skipped": r.skipped,
                "exact_match": r.exact_match,
                "teds": r.teds,
                "teds_struct": r.teds_struct,
                "pred_failed": r.pred_failed,
            }.items() if v is not None}
            for r in results
        ],
    )
    _emit_report(report, args)
    return EXIT_OK


def cmd_eval_kie(args) -> int:
    pred, gt = _existing(args.pred), _existing(args.gt)
    score = kie_scores(formats.read_kie(pred), formats.read_kie(gt), args.task)
    report = EvalReport(task=f"kie-{args.task}", protocol={"aggregation": "micro", "task": args.task})
    setattr(report, args.task, score)
    _emit_report(report, args)
    return EXIT_OK


def cmd_sort(args) -> int:
    boxes = formats.read_boxes(_existing(args.boxes))
    if args.algo == "yx":
        order = sort_yx(boxes)
    else:
        order = sort_tb_yx(boxes, _threshold_config(args.th))
    sys.stdout.write(json.dumps(order) + "\n")
    return EXIT_OK


def cmd_recover(args) -> int:
    pages = formats.read_bundle(_existing(args.bundle))
    config = _threshold_config(args.th)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = []
    for page in pages:
        doc = build_document(page, config)
        written = []
        if args.format in ("html", "both"):
            path = out_dir / f"{page.name}.html"
            path.write_text(emit_html(doc), encoding="utf-8")
            written.append(str(path))
        if args.format in ("md", "both"):
            path = out_dir / f"{page.name}.md"
            path.write_text(emit_markdown(doc), encoding="utf-8")
            written.append(str(path))
        for w in doc.warnings:
            log.warning("%s: %s", page.name, w)
        summary.append({"page": page.name, "blocks": len(doc.blocks), "files": written, "warnings": doc.warnings})
    sys.stdout.write(json.dumps({"pages": summary}, indent=2) + "\n")
    return EXIT_OK


def cmd_convert_table(args) -> int:
    text = Path(_existing(args.input)).read_text(encoding="utf-8")
    vocab = args.vocab
    if args.src == "html":
        grid = parse_html_table(text)
        seq = grid_to_tokens(grid, vocab)
    else:
        try:
            strings = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.input}: token input must be a JSON array of strings ({exc.msg})") from exc
        if isinstance(strings, dict):
            strings = strings.get("html", strings).get("structure", {}).get("tokens")
        if not isinstance(strings, list) or not all(isinstance(s, str) for s in strings):
            raise InputError(f"{args.input}: token input must be a JSON array of strings")
        seq = TokenSequence.from_strings(strings)
        seq = merge_td_tokens(seq) if vocab == MERGED else split_td_tokens(seq)
        grid = tokens_to_grid(seq)
    if args.dst == "tokens":
        out = json.dumps(seq.to_strings(), ensure_ascii=False)
    elif args.dst == "html":
        out = table_to_html(grid)
    else:
        out = emit_markdown(DocumentModel([TableBlock(grid)])).rstrip("\n")
    sys.stdout.write(out + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes (0 = one per CPU; default $DOCSTRUCT_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    def report_opts(p):
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="docstruct", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-layout", parents=[common], help="detection mAP")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou", choices=("single", "coco"), default="coco")
    report_opts(p)
    p.set_defaults(func=cmd_eval_layout)

    p = sub.add_parser("eval-table", parents=[common], help="structure accuracy, TEDS, TEDS-Struct")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--max-tokens", type=int, default=DEFAULT_MAX_TOKENS)
    p.add_argument("--struct-only", action="store_true")
    p.add_argument("--lenient", action="store_true", help="skip corrupt JSONL lines instead of failing")
    report_opts(p)
    p.set_defaults(func=cmd_eval_table)

    p = sub.add_parser("eval-kie", parents=[common], help="SER / RE precision, recall, Hmean")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--task", choices=("ser", "re"), required=True)
    report_opts(p)
    p.set_defaults(func=cmd_eval_kie)

    p = sub.add_parser("sort", parents=[common], help="reading order of boxes")
    p.add_argument("--boxes", required=True)
    p.add_argument("--algo", choices=("yx", "tbyx"), default="tbyx")
    p.add_argument("--th", default="auto", help="'auto' or a threshold in pixels")
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("recover", parents=[common], help="page bundle to HTML/Markdown")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=("html", "md", "both"), default="both")
    p.add_argument("--th", default="auto")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("convert-table", parents=[common], help="convert between HTML, tokens, Markdown")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--from", dest="src", choices=("html", "tokens"), required=True)
    p.add_argument("--to", dest="dst", choices=("html", "tokens", "markdown"), required=True)
    p.add_argument("--vocab", choices=(MERGED, SPLIT), default=MERGED)
    p.set_defaults(func=cmd_convert_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (InputError, DocstructError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Readers and writers for annotation, prediction and report files.

All files are UTF-8 JSON. Table annotations use the PubTabNet JSONL
schema, one object per line::

    {"filename": "x.png", "split": "val",
     "html": {"structure": {"tokens": ["<thead>", "<tr>", "<td>", ...]},
              "cells": [{"tokens": ["a", "b"], "bbox": [x0, y0, x1, y1]}, ...]}}

Detections, ground-truth boxes and KIE annotations are JSON arrays.
Reports are JSON with sorted keys and every ratio written as a fixed
6-decimal string, so equal runs give byte-identical files.
"""

from __future__ import annotations

import html as _html
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

from .errors import DocstructError, SchemaError, TableParseError, ValidationError
from .evaluation.detection import Detection, GtBox
from .evaluation.kie import PRF, Entity, KieDocument, Relation
from .evaluation.report import EvalReport
from .evaluation.table import TableSample
from .geometry import Box
from .recovery.model import LayoutRegion, PageBundle, TextLine
from .table.grid import TableGrid, align_cells
from .table.html import parse_html_table
from .table.tokens import CELL_OPENERS, TokenSequence, parse_token

_INLINE_TAG = re.compile(r"^</?[A-Za-z][A-Za-z0-9]*\s*/?>$")


@dataclass(frozen=True)
class Diagnostic:
    path: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.path}:{self.line}: {self.message}"


@dataclass(frozen=True)
class CellAnnotation:
    tokens: tuple[str, ...]
    bbox: Box | None = None

    @property
    def text(self) -> str:
        return "".join(t for t in self.tokens if not _INLINE_TAG.match(t))


@dataclass(frozen=True)
class TableAnnotationRecord:
    filename: str
    split: str
    structure: tuple[str, ...]
    cells: tuple[CellAnnotation, ...]
    line: int = 0
    path: str = ""


def _box(value: Any, what: str) -> Box:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise ValidationError(f"{what} must be a list of 4 numbers")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ValidationError(f"{what} must be numeric")
    return Box.from_seq(value)


def _require(obj: dict, key: str, kind: type | tuple, where: str = "") -> Any:
    if key not in obj:
        raise ValidationError(f"missing field {where + key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ValidationError(f"field {where + key!r} has wrong type {type(value).__name__}")
    return value


def parse_table_record(obj: Any, check_vocab: bool = True) -> TableAnnotationRecord:
    """Validate one decoded JSONL object. Raises :class:`ValidationError`."""
    if not isinstance(obj, dict):
        raise ValidationError(f"expected JSON object, got {type(obj).__name__}")
    filename = _require(obj, "filename", str)
    split = obj.get("split", "")
    if not isinstance(split, str):
        raise ValidationError("field 'split' must be a string")
    html = _require(obj, "html", dict)
    structure = _require(html, "structure", dict, "html.")
    tokens = _require(structure, "tokens", list, "html.structure.")
    if not all(isinstance(t, str) for t in tokens):
        raise ValidationError("html.structure.tokens must be strings")
    if check_vocab:
        for i, t in enumerate(tokens):
            try:
                parse_token(t, i)
            except TableParseError as exc:
                raise ValidationError(str(exc)) from exc
    cells_raw = _require(html, "cells", list, "html.")
    cells = []
    for k, cell in enumerate(cells_raw):
        if not isinstance(cell, dict):
            raise ValidationError(f"html.cells[{k}] must be an object")
        ctoks = _require(cell, "tokens", list, f"html.cells[{k}].")
        if not all(isinstance(t, str) for t in ctoks):
            raise ValidationError(f"html.cells[{k}].tokens must be strings")
        bbox = _box(cell["bbox"], f"html.cells[{k}].bbox") if cell.get("bbox") is not None else None
        cells.append(CellAnnotation(tuple(ctoks), bbox))
    return TableAnnotationRecord(filename, split, tuple(tokens), tuple(cells))


def read_table_jsonl(
    path: str | Path,
    strict: bool = True,
    diagnostics: list[Diagnostic] | None = None,
    check_vocab: bool = True,
) -> Iterator[TableAnnotationRecord]:
    """Stream validated records from a PubTabNet-style JSONL file.

    The file is read line by line, so memory stays bounded by the longest
    line. In strict mode the first bad line raises :class:`SchemaError`;
    otherwise bad lines are skipped and reported into ``diagnostics``.
    Blank lines are ignored.
    """
    p = str(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"malformed JSON: {exc.msg} (col {exc.colno})") from exc
                rec = parse_table_record(obj, check_vocab)
            except ValidationError as exc:
                if strict:
                    raise SchemaError(str(exc), p, lineno) from exc
                if diagnostics is not None:
                    diagnostics.append(Diagnostic(p, lineno, str(exc)))
                continue
            yield TableAnnotationRecord(rec.filename, rec.split, rec.structure, rec.cells, lineno, p)


def _content_html(cell: CellAnnotation) -> str:
    return "".join(t if _INLINE_TAG.match(t) else _html.escape(t, quote=False) for t in cell.tokens)


def record_html(rec: TableAnnotationRecord) -> str:
    """Table HTML with cell content spliced into the structure tokens.

    A record with no cell annotations at all is treated as structure only.
    """
    structure = [parse_token(t, i) for i, t in enumerate(rec.structure)]
    n_open = sum(1 for t in structure if t.kind in CELL_OPENERS)
    if rec.cells and len(rec.cells) != n_open:
        raise ValidationError(f"{rec.filename}: {n_open} cell tokens vs {len(rec.cells)} cell annotations")

    def content(k: int) -> str:
        if not rec.cells:
            return ""
        if k >= len(rec.cells):
            raise ValidationError(f"{rec.filename}: more cell closings than cell annotations")
        return _content_html(rec.cells[k])

    parts = []
    k = 0
    for tok in (t.text for t in structure):
        if tok == "<td></td>":
            parts.append(f"<td>{content(k)}</td>")
            k += 1
        elif tok == "</td>":
            parts.append(content(k) + tok)
            k += 1
        else:
            parts.append(tok)
    body = "".join(parts)
    return body if body.startswith("<table>") else f"<table>{body}</table>"


def record_to_table(rec: TableAnnotationRecord) -> tuple[TableGrid, str]:
    """Grid (with text and boxes) plus ground-truth HTML for one record."""
    seq = TokenSequence.from_strings(rec.structure)
    context = f"{rec.filename} ({rec.path}:{rec.line})" if rec.path else rec.filename
    grid = align_cells(seq, [c.bbox for c in rec.cells], context)
    for cell, ann in zip(grid.cells, rec.cells):
        cell.text = ann.text
    return grid, record_html(rec)


def table_sample(gt: TableAnnotationRecord, pred: TableAnnotationRecord | None) -> TableSample:
    """Pair a ground-truth record with its prediction.

    Ground-truth problems raise; a prediction that cannot be rendered to
    HTML is kept with ``pred_html=None`` and later scores 0.
    """
    try:
        gt_grid, gt_html = record_to_table(gt)
    except DocstructError as exc:
        raise ValidationError(f"ground truth {gt.filename} ({gt.path}:{gt.line}): {exc}") from exc
    pred_tokens: tuple[str, ...] = ()
    pred_html = None
    if pred is not None:
        pred_tokens = pred.structure
        try:
            pred_html = record_html(pred)
        except DocstructError:
            pred_html = None
    return TableSample(gt.filename, pred_tokens, gt.structure, pred_html, gt_html)


def _load_array(path: str | Path, what: str) -> list:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg}", str(path), exc.lineno) from exc
    if not isinstance(data, list):
        raise SchemaError(f"expected a JSON array of {what}", str(path))
    return data


def _records(path: str | Path, what: str, parse) -> list:
    out = []
    for k, obj in enumerate(_load_array(path, what)):
        try:
            if not isinstance(obj, dict):
                raise ValidationError(f"expected object, got {type(obj).__name__}")
            out.append(parse(obj))
        except ValidationError as exc:
            raise SchemaError(f"record {k}: {exc}", str(path)) from exc
    return out


def read_detections(path: str | Path) -> list[Detection]:
    def parse(o):
        score = _require(o, "score", (int, float))
        return Detection(str(_require(o, "image_id", (str, int))), _require(o, "category", str),
                         _box(_require(o, "bbox", list), "bbox"), float(score))
    return _records(path, "detections", parse)


def read_gt_boxes(path: str | Path) -> list[GtBox]:
    def parse(o):
        if "score" in o:
            raise ValidationError("ground-truth boxes carry no score")
        return GtBox(str(_require(o, "image_id", (str, int))), _require(o, "category", str),
                     _box(_require(o, "bbox", list), "bbox"))
    return _records(path, "ground-truth boxes", parse)


def read_kie(path: str | Path) -> list[KieDocument]:
    def parse(o):
        entities = []
        for k, e in enumerate(_require(o, "entities", list)):
            if not isinstance(e, dict):
                raise ValidationError(f"entities[{k}] must be an object")
            box = _box(e["bbox"], f"entities[{k}].bbox") if e.get("bbox") is not None else None
            entities.append(Entity(str(_require(e, "id", (str, int))), _require(e, "label", str),
                                   _require(e, "text", str), box))
        relations = []
        for k, pair in enumerate(o.get("relations", [])):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValidationError(f"relations[{k}] must be a [question_id, answer_id] pair")
            relations.append(Relation(str(pair[0]), str(pair[1])))
        return KieDocument(str(_require(o, "image_id", (str, int))), entities, relations)
    return _records(path, "KIE records", parse)


def read_boxes(path: str | Path) -> list[Box]:
    """Boxes as ``[x0, y0, x1, y1]`` lists or objects with a ``bbox`` field."""
    out = []
    for k, obj in enumerate(_load_array(path, "boxes")):
        try:
            out.append(_box(obj.get("bbox") if isinstance(obj, dict) else obj, "bbox"))
        except ValidationError as exc:
            raise SchemaError(f"record {k}: {exc}", str(path)) from exc
    return out


def _page(obj: Any, default_name: str) -> PageBundle:
    if not isinstance(obj, dict):
        raise ValidationError("page must be an object")
    size = _require(obj, "page_size", list)
    if len(size) != 2:
        raise ValidationError("page_size must be [width, height]")
    regions = []
    for k, r in enumerate(obj.get("regions", [])):
        regions.append(LayoutRegion(_require(r, "category", str), _box(_require(r, "bbox", list), f"regions[{k}].bbox"),
                                    float(r.get("score", 1.0))))
    lines = [
        TextLine(_box(_require(t, "bbox", list), f"text_lines[{k}].bbox"), _require(t, "text", str))
        for k, t in enumerate(obj.get("text_lines", []))
    ]
    tables = {}
    for key, value in obj.get("tables", {}).items():
        html = value.get("html") if isinstance(value, dict) else value
        if not isinstance(html, str):
            raise ValidationError(f"tables[{key}] needs table HTML")
        try:
            tables[int(key)] = parse_html_table(html)
        except (ValueError, DocstructError) as exc:
            raise ValidationError(f"tables[{key}]: {exc}") from exc
    return PageBundle((float(size[0]), float(size[1])), regions, lines, tables, str(obj.get("name", default_name)))


def read_bundle(path: str | Path) -> list[PageBundle]:
    """Page bundles from a JSON file holding one page or ``{"pages": [...]}``.

    Unnamed pages are named after the file stem (``stem`` for a single
    page, ``stem_<k>`` for page ``k`` of several).
    """
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg}", str(p), exc.lineno) from exc
    pages = data.get("pages") if isinstance(data, dict) and "pages" in data else [data]
    if not isinstance(pages, list):
        raise SchemaError("'pages' must be an array", str(p))
    out = []
    for k, page in enumerate(pages):
        name = p.stem if len(pages) == 1 else f"{p.stem}_{k}"
        try:
            out.append(_page(page, name))
        except (ValidationError, KeyError, TypeError, AttributeError) as exc:
            raise SchemaError(f"page {k}: {exc}", str(p)) from exc
    return out


# ---------------------------------------------------------------- reports

_RATIO_KEYS = {"map", "structure_accuracy", "mean_teds", "mean_teds_struct", "teds", "teds_struct",
               "precision", "recall", "hmean"}


def _fmt(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, dict):
        return {str(k): _fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fmt(v) for v in value]
    return value


def report_to_dict(report: EvalReport) -> dict[str, Any]:
    out: dict[str, Any] = {"task": report.task, "protocol": _fmt(report.protocol)}
    for key in ("map", "structure_accuracy", "mean_teds", "mean_teds_struct"):
        value = getattr(report, key)
        if value is not None:
            out[key] = _fmt(float(value))
    if report.per_class_ap is not None:
        out["per_class_ap"] = {k: _fmt(float(v)) for k, v in report.per_class_ap.items()}
    for key in ("n_evaluated", "n_skipped", "n_pred_failed"):
        value = getattr(report, key)
        if value is not None:
            out[key] = int(value)
    for key in ("ser", "re"):
        prf = getattr(report, key)
        if prf is not None:
            out[key] = {k: _fmt(float(v)) for k, v in prf._asdict().items()}
    if report.per_sample:
        out["per_sample"] = _fmt(report.per_sample)
    return out


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def report_to_text(report: EvalReport) -> str:
    rows: list[tuple[str, str]] = [("task", report.task)]
    for key, value in sorted(report.protocol.items()):
        rows.append((f"protocol.{key}", json.dumps(_fmt(value))))
    for key in ("map", "structure_accuracy", "mean_teds", "mean_teds_struct"):
        value = getattr(report, key)
        if value is not None:
            rows.append((key, f"{value:.6f}"))
    for cat, value in sorted((report.per_class_ap or {}).items()):
        rows.append((f"ap[{cat}]", f"{value:.6f}"))
    for key in ("n_evaluated", "n_skipped", "n_pred_failed"):
        value = getattr(report, key)
        if value is not None:
            rows.append((key, str(value)))
    for key in ("ser", "re"):
        prf = getattr(report, key)
        if prf is not None:
            for name, value in prf._asdict().items():
                rows.append((f"{key}.{name}", f"{value:.6f}"))
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def write_report(report: EvalReport, path: str | Path, format: str = "json") -> None:
    """Write ``report`` as JSON or as a plain-text table."""
    if format == "json":
        text = report_to_json(report)
    elif format == "text":
        text = report_to_text(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _unfmt(key: str, value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _unfmt(k, v) for k, v in value.items()}
    if isinstance(value, list):
        return [_unfmt(key, v) for v in value]
    if isinstance(value, str) and (key in _RATIO_KEYS or key == "iou_thresholds"):
        return float(value)
    return value


def read_report(path: str | Path) -> EvalReport:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    report = EvalReport(task=data["task"], protocol=_unfmt("protocol", data.get("protocol", {})))
    for key in ("map", "structure_accuracy", "mean_teds", "mean_teds_struct"):
        if key in data:
            setattr(report, key, float(data[key]))
    if "per_class_ap" in data:
        report.per_class_ap = {k: float(v) for k, v in data["per_class_ap"].items()}
    for key in ("n_evaluated", "n_skipped", "n_pred_failed"):
        if key in data:
            setattr(report, key, int(data[key]))
    for key in ("ser", "re"):
        if key in data:
            setattr(report, key, PRF(**{k: float(v) for k, v in data[key].items()}))
    report.per_sample = _unfmt("per_sample", data.get("per_sample", []))
    return report

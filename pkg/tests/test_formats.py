from __future__ import annotations

import json
import random

import pytest

from docstruct import formats
from docstruct.errors import AlignmentError, SchemaError, ValidationError
from docstruct.evaluation import PRF, EvalReport
from docstruct.table import parse_html_table

from generators import random_grid, table_record


def write_jsonl(path, objs):
    path.write_text("".join((o if isinstance(o, str) else json.dumps(o)) + "\n" for o in objs), encoding="utf-8")
    return path


def test_record_html_splices_escaped_content():
    obj = {"filename": "a.png", "html": {
        "structure": {"tokens": ["<thead>", "<tr>", "<td>", "</td>", "<td", ' colspan="2"', ">", "</td>", "</tr>",
                                 "</thead>"]},
        "cells": [{"tokens": ["<b>", "a", "&", "b", "</b>"], "bbox": [0, 0, 1, 1]}, {"tokens": []}]}}
    rec = formats.parse_table_record(obj)
    html = formats.record_html(rec)
    assert html == '<table><thead><tr><td><b>a&amp;b</b></td><td colspan="2"></td></tr></thead></table>'
    grid, _ = formats.record_to_table(rec)
    assert grid.cells[0].text == "a&b" and grid.cells[1].bbox is None and grid.header_rows == 1


def test_record_cell_count_mismatch():
    obj = table_record("x", random_grid(random.Random(2), 3, 3, holes=False))
    obj["html"]["cells"].append({"tokens": ["z"]})
    rec = formats.parse_table_record(obj)
    with pytest.raises(ValidationError):
        formats.record_html(rec)
    with pytest.raises(AlignmentError):
        formats.record_to_table(rec)


@pytest.mark.parametrize("obj, field", [
    ({"html": {}}, "filename"),
    ({"filename": "a"}, "html"),
    ({"filename": "a", "html": {"cells": []}}, "structure"),
    ({"filename": "a", "html": {"structure": {"tokens": ["<tr>"]}}}, "cells"),
])
def test_missing_fields_are_named(obj, field):
    with pytest.raises(ValidationError, match=field):
        formats.parse_table_record(obj)


def test_jsonl_strict_and_lenient(tmp_path):
    good = table_record("g.png", random_grid(random.Random(1), 2, 2))
    path = write_jsonl(tmp_path / "t.jsonl", [good, "{broken", "", {"filename": "b", "html": {}}, good])
    with pytest.raises(SchemaError) as err:
        list(formats.read_table_jsonl(path))
    assert err.value.line == 2 and "t.jsonl:2" in str(err.value)
    diags = []
    recs = list(formats.read_table_jsonl(path, strict=False, diagnostics=diags))
    assert [r.line for r in recs] == [1, 5]
    assert [d.line for d in diags] == [2, 4]


def test_vocab_check_optional(tmp_path):
    bad = {"filename": "p", "html": {"structure": {"tokens": ["<tr>", "<blink>", "</tr>"]}, "cells": []}}
    path = write_jsonl(tmp_path / "p.jsonl", [bad])
    with pytest.raises(SchemaError, match="unknown structure token"):
        list(formats.read_table_jsonl(path))
    assert len(list(formats.read_table_jsonl(path, check_vocab=False))) == 1


def test_table_sample_keeps_unrenderable_prediction():
    grid = random_grid(random.Random(3), 3, 3, holes=False)
    gt = formats.parse_table_record(table_record("a", grid))
    pred = formats.parse_table_record({"filename": "a", "html": {"structure": {"tokens": ["</td>", "</td>"]},
                                                                 "cells": [{"tokens": ["x"]}]}}, check_vocab=False)
    sample = formats.table_sample(gt, pred)
    assert sample.pred_html is None and sample.gt_tokens == gt.structure
    assert formats.table_sample(gt, None).pred_tokens == ()


def test_record_round_trip_random():
    rng = random.Random(5)
    for _ in range(100):
        grid = random_grid(rng)
        rec = formats.parse_table_record(table_record("r", grid, rng.choice(["split", "merged"])))
        back, html = formats.record_to_table(rec)
        assert [(c.row, c.col, c.rowspan, c.colspan, c.text) for c in back.cells] == \
            [(c.row, c.col, c.rowspan, c.colspan, c.text) for c in grid.cells]
        assert [c.text for c in parse_html_table(html).cells] == [c.text for c in grid.cells]


def test_detection_files(tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps([{"image_id": 1, "category": "text", "bbox": [0, 0, 2, 2], "score": 0.5}]))
    d = formats.read_detections(p)
    assert d[0].image_id == "1" and d[0].bbox.area == 4
    with pytest.raises(SchemaError, match="record 0"):
        formats.read_gt_boxes(p)
    p.write_text("")
    assert formats.read_detections(p) == []
    p.write_text('{"not": "array"}')
    with pytest.raises(SchemaError):
        formats.read_detections(p)
    p.write_text(json.dumps([{"image_id": 1, "category": "text", "bbox": [3, 0, 2, 2], "score": 0.5}]))
    with pytest.raises(SchemaError, match="record 0"):
        formats.read_detections(p)


def test_kie_file(tmp_path):
    p = tmp_path / "k.json"
    p.write_text(json.dumps([{"image_id": "i", "entities": [{"id": 1, "label": "q", "text": "x"},
                                                            {"id": 2, "label": "a", "text": "y"}],
                              "relations": [[1, 2]]}]))
    doc = formats.read_kie(p)[0]
    assert doc.relation_keys() == [("q", "x", "a", "y")]
    p.write_text(json.dumps([{"image_id": "i", "entities": [], "relations": [[1, 2]]}]))
    with pytest.raises(SchemaError, match="unknown entity"):
        formats.read_kie(p)


def test_bundle_pages(tmp_path):
    page = {"page_size": [100, 100], "regions": [{"category": "table", "bbox": [0, 0, 50, 50]}],
            "text_lines": [{"bbox": [1, 1, 20, 10], "text": "x"}],
            "tables": {"0": {"html": "<table><tr><td>x</td></tr></table>"}}}
    p = tmp_path / "doc.json"
    p.write_text(json.dumps(page))
    [one] = formats.read_bundle(p)
    assert one.name == "doc" and one.tables[0].cells[0].text == "x"
    p.write_text(json.dumps({"pages": [page, page]}))
    assert [b.name for b in formats.read_bundle(p)] == ["doc_0", "doc_1"]
    page["tables"] = {"0": "<table><tr><td>x</td></table>"}
    p.write_text(json.dumps(page))
    with pytest.raises(SchemaError, match="tables"):
        formats.read_bundle(p)


def test_report_json_is_stable_and_round_trips(tmp_path):
    report = EvalReport(task="layout", protocol={"iou_thresholds": [0.5, 0.55]}, map=1 / 3,
                        per_class_ap={"b": 0.25, "a": 1.0}, ser=PRF(0.5, 1.0, 2 / 3))
    text = formats.report_to_json(report)
    assert '"map": "0.333333"' in text
    assert text.index('"a"') < text.index('"b"')
    path = tmp_path / "r.json"
    formats.write_report(report, path)
    back = formats.read_report(path)
    assert back.map == pytest.approx(1 / 3, abs=1e-6)
    assert back.protocol == {"iou_thresholds": [0.5, 0.55]}
    assert back.ser.hmean == pytest.approx(2 / 3, abs=1e-6)
    assert formats.report_to_json(back) == text
    formats.write_report(report, path, "text")
    assert "map" in path.read_text()

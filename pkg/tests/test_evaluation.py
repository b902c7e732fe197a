from __future__ import annotations

import random
from fractions import Fraction

import pytest

from docstruct.errors import ValidationError
from docstruct.evaluation import (
    COCO_IOU_THRESHOLDS,
    Detection,
    Entity,
    GtBox,
    KieDocument,
    Relation,
    TableSample,
    average_precision,
    batch_teds,
    kie_scores,
    mean_ap,
    re_hmean,
    score_samples,
    ser_hmean,
    structure_accuracy,
)
from docstruct.evaluation.detection import ap_from_flags
from docstruct.geometry import Box

from oracles import max_matching, pr_integration_ap

# ------------------------------------------------------------ detection


def test_coco_thresholds():
    assert COCO_IOU_THRESHOLDS == (0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)


def test_ap_hand_worked():
    # hits at ranks 1 and 3 of 2 gts: envelope gives 0.5*1 + 0.5*(2/3)
    assert ap_from_flags([True, False, True], 2) == pytest.approx(0.5 + 1 / 3)
    assert ap_from_flags([], 0) == 1.0
    assert ap_from_flags([False], 0) == 0.0
    assert ap_from_flags([], 3) == 0.0


def test_detection_score_range():
    with pytest.raises(ValidationError):
        Detection("a", "text", Box(0, 0, 1, 1), 1.5)


def test_duplicate_detection_is_false_positive():
    g = [GtBox("a", "t", Box(0, 0, 10, 10))]
    d = [Detection("a", "t", Box(0, 0, 10, 10), 0.9), Detection("a", "t", Box(0, 0, 10, 10), 0.8)]
    assert average_precision(d, g) == 1.0
    d = [Detection("a", "t", Box(0, 0, 10, 10), 0.5), Detection("a", "t", Box(50, 50, 60, 60), 0.9)]
    assert average_precision(d, g) == pytest.approx(0.5)


def test_detections_do_not_cross_images():
    g = [GtBox("a", "t", Box(0, 0, 10, 10))]
    d = [Detection("b", "t", Box(0, 0, 10, 10), 0.9)]
    assert average_precision(d, g) == 0.0


def test_mean_ap_categories():
    g = [GtBox("a", "text", Box(0, 0, 10, 10)), GtBox("a", "table", Box(20, 20, 40, 40))]
    d = [Detection("a", "text", Box(0, 0, 10, 10), 0.9), Detection("a", "figure", Box(0, 0, 1, 1), 0.3)]
    value, per = mean_ap(d, g)
    assert per == {"figure": 0.0, "table": 0.0, "text": 1.0}
    assert value == pytest.approx(1 / 3)
    assert mean_ap([], []) == (1.0, {})


def test_mean_ap_coco_averages_thresholds():
    g = [GtBox("a", "t", Box(0, 0, 10, 10))]
    d = [Detection("a", "t", Box(0, 0, 10, 7), 0.9)]  # IoU 0.7
    value, _ = mean_ap(d, g)
    assert value == pytest.approx(5 / 10)


def test_ap_matches_oracle_random():
    rng = random.Random(21)
    for _ in range(150):
        gts, dets = [], []
        for _ in range(rng.randint(0, 4)):
            x, y = rng.randint(0, 6), rng.randint(0, 6)
            gts.append(("img" + str(rng.randint(0, 1)), (x, y, x + rng.randint(1, 4), y + rng.randint(1, 4))))
        for _ in range(rng.randint(0, 4)):
            x, y = rng.randint(0, 6), rng.randint(0, 6)
            dets.append(("img" + str(rng.randint(0, 1)), (x, y, x + rng.randint(1, 4), y + rng.randint(1, 4)),
                         rng.choice([0.2, 0.5, 0.5, 0.9])))
        got = average_precision([Detection(i, "c", Box(*b), s) for i, b, s in dets],
                                [GtBox(i, "c", Box(*b)) for i, b in gts], 0.5)
        assert got == pytest.approx(float(pr_integration_ap(dets, gts, Fraction(1, 2))), abs=1e-12)


# ------------------------------------------------------------ table metrics

GT = ["<tr>", "<td></td>", "<td></td>", "</tr>"]
GT_HTML = "<table><tr><td>a</td><td>b</td></tr></table>"


def sample(sid, pred_tokens, pred_html, gt_tokens=GT, gt_html=GT_HTML):
    return TableSample(sid, tuple(pred_tokens), tuple(gt_tokens), pred_html, gt_html)


def test_structure_accuracy_compares_merged_forms():
    split_pred = ["<tr>", "<td>", "</td>", "<td>", "</td>", "</tr>"]
    samples = [sample("1", split_pred, GT_HTML), sample("2", GT[:2] + ["</tr>"], None)]
    assert structure_accuracy(samples) == (0.5, 2, 0)
    assert structure_accuracy([]) == (0.0, 0, 0)


def test_length_cap_skips_accuracy_but_not_teds():
    long_gt = ["<tr>"] + ["<td></td>"] * 499 + ["</tr>"]  # 501 tokens
    long_html = "<table><tr>" + "<td></td>" * 499 + "</tr></table>"
    samples = [sample("ok", GT, GT_HTML), sample("long", long_gt, long_html, long_gt, long_html)]
    acc, n_eval, n_skip = structure_accuracy(samples)
    assert (acc, n_eval, n_skip) == (1.0, 1, 1)
    assert structure_accuracy(samples, max_tokens=501)[2] == 0
    mean_value, per = batch_teds(samples)
    assert per == [1.0, 1.0] and mean_value == 1.0


def test_unparseable_prediction_scores_zero():
    results = score_samples([sample("x", ["<tr>"], "<table><tr><td>"), sample("y", [], None)])
    assert [(r.teds, r.teds_struct, r.pred_failed) for r in results] == [(0.0, 0.0, True)] * 2


def test_bad_ground_truth_is_an_error():
    with pytest.raises(ValidationError, match="sample bad"):
        score_samples([sample("bad", GT, GT_HTML, GT, "<p>nothing</p>")])


def test_struct_only_leaves_teds_empty():
    r = score_samples([sample("x", GT, "<table><tr><td>z</td><td>b</td></tr></table>")], struct_only=True)[0]
    assert r.teds is None and r.teds_struct == 1.0


def test_parallel_scoring_is_ordered_and_identical():
    samples = [sample(str(k), GT, f"<table><tr><td>{'a' * k}</td><td>b</td></tr></table>") for k in range(9)]
    assert score_samples(samples, workers=1) == score_samples(samples, workers=3)


# ------------------------------------------------------------ KIE


def ents(*pairs):
    return [Entity(str(k), label, text) for k, (label, text) in enumerate(pairs)]


def test_ser_fixture_four_sevenths():
    gt = ents(("q", "Name"), ("a", "Bob"), ("q", "Date"), ("a", "May"))
    pred = ents(("q", "Name"), ("a", " Bob "), ("a", "June"))
    res = ser_hmean(pred, gt)
    assert res.precision == pytest.approx(2 / 3) and res.recall == pytest.approx(0.5)
    assert res.hmean == pytest.approx(4 / 7, abs=1e-12)


def test_ser_label_must_match():
    assert ser_hmean(ents(("a", "x")), ents(("q", "x"))).hmean == 0.0
    assert ser_hmean([], []).hmean == 1.0
    assert ser_hmean([], ents(("q", "x"))) == (0.0, 0.0, 0.0)


def test_relations():
    gt = KieDocument("i", ents(("q", "Name"), ("a", "Bob"), ("q", "Age"), ("a", "3")),
                     [Relation("0", "1"), Relation("2", "3")])
    pred = KieDocument("i", ents(("q", "Name"), ("a", "Bob"), ("a", "3")), [Relation("0", "1"), Relation("0", "2")])
    assert re_hmean(pred, gt) == (0.5, 0.5, 0.5)


def test_dangling_relation_rejected():
    with pytest.raises(ValidationError, match="unknown entity"):
        KieDocument("i", ents(("q", "x")), [Relation("0", "9")])
    with pytest.raises(ValidationError, match="duplicate"):
        KieDocument("i", [Entity("1", "q", "x"), Entity("1", "a", "y")])


def test_kie_micro_aggregation():
    g1 = KieDocument("1", ents(("q", "a"), ("q", "b")))
    g2 = KieDocument("2", ents(("q", "c")))
    p1 = KieDocument("1", ents(("q", "a")))
    extra = KieDocument("3", ents(("q", "z")))
    res = kie_scores([p1, extra], [g1, g2], "ser")
    assert res.precision == pytest.approx(0.5) and res.recall == pytest.approx(1 / 3)


def test_greedy_matching_equals_exhaustive():
    rng = random.Random(8)
    for _ in range(300):
        keys = [("q", "a"), ("q", "b"), ("a", "a")]
        p = [rng.choice(keys) for _ in range(rng.randint(0, 6))]
        g = [rng.choice(keys) for _ in range(rng.randint(0, 6))]
        res = ser_hmean(ents(*p), ents(*g))
        m = max_matching(p, g)
        if p or g:
            prec = m / len(p) if p else 0.0
            rec = m / len(g) if g else 0.0
            assert res.precision == pytest.approx(prec) and res.recall == pytest.approx(rec)
            if prec + rec:
                assert res.hmean == pytest.approx(2 * prec * rec / (prec + rec), abs=1e-12)

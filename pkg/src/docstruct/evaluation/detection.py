"""Detection mAP for layout analysis."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from ..errors import ValidationError
from ..geometry import Box, iou

# 0.50:0.05:0.95
COCO_IOU_THRESHOLDS: tuple[float, ...] = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))
SINGLE_IOU_THRESHOLDS: tuple[float, ...] = (0.5,)


@dataclass(frozen=True)
class Detection:
    image_id: str
    category: str
    bbox: Box
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"detection score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class GtBox:
    image_id: str
    category: str
    bbox: Box


def match_detections(dets: Sequence[Detection], gts: Sequence[GtBox], iou_threshold: float) -> list[bool]:
    """TP flag per detection, in descending-score order (ties keep input order).

    Each detection takes the unmatched ground truth of its image with the
    highest IoU (lowest index on ties); it is a true positive when that IoU
    reaches the threshold.
    """
    by_image: dict[str, list[int]] = defaultdict(list)
    for k, g in enumerate(gts):
        by_image[g.image_id].append(k)
    matched = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda k: -dets[k].score)
    flags = []
    for k in order:
        det = dets[k]
        best, best_iou = -1, -1.0
        for g in by_image.get(det.image_id, ()):
            if matched[g]:
                continue
            v = iou(det.bbox, gts[g].bbox)
            if v > best_iou:
                best, best_iou = g, v
        if best >= 0 and best_iou >= iou_threshold:
            matched[best] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags


def ap_from_flags(flags: Sequence[bool], n_gt: int) -> float:
    """All-points interpolated area under the precision/recall curve."""
    if n_gt == 0:
        return 0.0 if flags else 1.0
    recall = []
    precision = []
    tp = 0
    for k, hit in enumerate(flags, 1):
        tp += hit
        recall.append(tp / n_gt)
        precision.append(tp / k)
    mrec = [0.0] + recall + [1.0]
    mpre = [0.0] + precision + [0.0]
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    return sum((mrec[i] - mrec[i - 1]) * mpre[i] for i in range(1, len(mrec)) if mrec[i] != mrec[i - 1])


def average_precision(dets: Sequence[Detection], gts: Sequence[GtBox], iou_threshold: float = 0.5) -> float:
    """AP for a single category."""
    return ap_from_flags(match_detections(dets, gts, iou_threshold), len(gts))


def mean_ap(
    dets: Sequence[Detection],
    gts: Sequence[GtBox],
    iou_thresholds: Sequence[float] = COCO_IOU_THRESHOLDS,
) -> tuple[float, dict[str, float]]:
    """mAP over categories and IoU thresholds.

    Returns ``(map, per_class_ap)`` where each class AP is already averaged
    over the thresholds. Categories seen only in detections score 0.
    With no categories at all the result is 1.0 (nothing to miss).
    """
    if not iou_thresholds:
        raise ValidationError("need at least one IoU threshold")
    det_by_cat: dict[str, list[Detection]] = defaultdict(list)
    gt_by_cat: dict[str, list[GtBox]] = defaultdict(list)
    for d in dets:
        det_by_cat[d.category].append(d)
    for g in gts:
        gt_by_cat[g.category].append(g)
    per_class: dict[str, float] = {}
    for cat in sorted(set(det_by_cat) | set(gt_by_cat)):
        aps = [average_precision(det_by_cat[cat], gt_by_cat[cat], t) for t in iou_thresholds]
        per_class[cat] = sum(aps) / len(aps)
    if not per_class:
        return 1.0, {}
    return sum(per_class.values()) / len(per_class), per_class

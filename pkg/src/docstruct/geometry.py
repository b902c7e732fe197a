"""Axis-aligned boxes and reading-order sorting.

Two orderings are provided. :func:`sort_yx` is the plain top-to-bottom,
left-to-right sort. :func:`sort_tb_yx` first groups boxes into lines whose
vertical centres lie within a threshold of the line's first box, then reads
each line left to right. This fixes the classic failure of the plain sort
where a box that starts a few pixels lower but further left is read first.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError

__all__ = [
    "Box",
    "OrderConfig",
    "iou",
    "sort_yx",
    "group_lines",
    "sort_tb_yx",
    "default_threshold",
]


@dataclass(frozen=True)
class Box:
    """Rectangle in pixel coordinates, origin top-left, y growing downward."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        coords = (self.x0, self.y0, self.x1, self.y1)
        if not all(math.isfinite(c) for c in coords):
            raise ValidationError(f"box coordinates must be finite: {coords}")
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValidationError(f"box has negative extent: {coords}")

    @classmethod
    def from_seq(cls, values: Iterable[float]) -> Box:
        vals = [float(v) for v in values]
        if len(vals) != 4:
            raise ValidationError(f"box needs 4 coordinates, got {len(vals)}")
        return cls(*vals)

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def cx(self) -> float:
        return (self.x0 + self.x1) / 2

    @property
    def cy(self) -> float:
        return (self.y0 + self.y1) / 2

    def intersection(self, other: Box) -> float:
        w = min(self.x1, other.x1) - max(self.x0, other.x0)
        h = min(self.y1, other.y1) - max(self.y0, other.y0)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def as_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class OrderConfig:
    """How :func:`sort_tb_yx` picks its line threshold.

    Attributes:
        threshold_mode: ``"fixed"`` uses ``fixed_threshold`` pixels; ``"auto"``
            uses ``auto_factor`` times the median box height.
        fixed_threshold: Threshold in pixels for fixed mode.
        auto_factor: Multiplier on the median height for auto mode.
    """

    threshold_mode: str = "auto"
    fixed_threshold: float = 0.0
    auto_factor: float = 0.5

    def __post_init__(self) -> None:
        if self.threshold_mode not in ("fixed", "auto"):
            raise ValidationError(f"unknown threshold_mode {self.threshold_mode!r}")
        if not self.fixed_threshold >= 0:
            raise ValidationError("fixed_threshold must be >= 0")
        if not self.auto_factor > 0:
            raise ValidationError("auto_factor must be > 0")

    @classmethod
    def fixed(cls, threshold: float) -> OrderConfig:
        return cls(threshold_mode="fixed", fixed_threshold=float(threshold))

    def resolve(self, boxes: Sequence[Box]) -> float:
        if self.threshold_mode == "fixed":
            return self.fixed_threshold
        return default_threshold(boxes, self.auto_factor)


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0 when the union has no area."""
    inter = a.intersection(b)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def sort_yx(boxes: Sequence[Box]) -> list[int]:
    """Indices of ``boxes`` sorted by top edge, then left edge, then input index."""
    return sorted(range(len(boxes)), key=lambda i: (boxes[i].y0, boxes[i].x0, i))


def group_lines(boxes: Sequence[Box], th: float) -> list[list[int]]:
    """Partition boxes into text lines.

    Boxes are scanned in :func:`sort_yx` order. A box joins the current line
    when its vertical centre is strictly closer than ``th`` to the centre of
    the line's first box; otherwise it opens a new line. Anchoring on the
    first box keeps the grouping deterministic, which a pairwise
    "close enough" comparison would not be (it is not transitive).
    """
    if th < 0:
        raise ValidationError("line threshold must be >= 0")
    lines: list[list[int]] = []
    anchor_cy = 0.0
    for i in sort_yx(boxes):
        cy = boxes[i].cy
        if lines and abs(cy - anchor_cy) < th:
            lines[-1].append(i)
        else:
            lines.append([i])
            anchor_cy = cy
    return lines


def default_threshold(boxes: Sequence[Box], factor: float = 0.5) -> float:
    """``factor`` times the median box height (0 for no boxes)."""
    if not factor > 0:
        raise ValidationError("factor must be > 0")
    if not boxes:
        return 0.0
    return factor * statistics.median(b.height for b in boxes)


def sort_tb_yx(boxes: Sequence[Box], config: OrderConfig | None = None) -> list[int]:
    """Threshold-based YX reading order.

    Returns a permutation of ``range(len(boxes))``: lines top to bottom in
    anchor order, each line left to right by ``x0`` (input index breaks ties).
    With a zero threshold this reduces exactly to :func:`sort_yx`.
    """
    config = config or OrderConfig()
    th = config.resolve(boxes)
    order: list[int] = []
    for line in group_lines(boxes, th):
        order.extend(sorted(line, key=lambda i: (boxes[i].x0, i)))
    return order

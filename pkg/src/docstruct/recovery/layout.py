"""Region-level layout: line assignment, column detection, region order."""

from __future__ import annotations

from typing import Sequence

from ..geometry import Box, OrderConfig, sort_tb_yx
from .model import FURNITURE, LayoutRegion, TextLine

SPANNING = -1
LEFT = 0
RIGHT = 1

MIN_OVERLAP = 0.5
GUTTER_LO, GUTTER_HI = 0.35, 0.65
GUTTER_MIN_WIDTH = 0.03


def overlap_ratio(line: Box, region: Box) -> float:
    """Fraction of the line's area inside the region.

    Degenerate (zero-area) lines count as fully inside when their centre is.
    """
    if line.area > 0:
        return line.intersection(region) / line.area
    inside = region.x0 <= line.cx <= region.x1 and region.y0 <= line.cy <= region.y1
    return 1.0 if inside else 0.0


def assign_text_to_regions(
    text_lines: Sequence[TextLine],
    regions: Sequence[LayoutRegion],
    config: OrderConfig | None = None,
) -> tuple[dict[int, list[int]], list[int]]:
    """Give each line to the body region holding most of its area.

    Lines with less than half their area in any body region, and lines in
    headers or footers, become orphans so no text is silently dropped.
    Returns ``(region index -> line indices in reading order, orphans)``,
    both ordered with :func:`sort_tb_yx`.
    """
    buckets: dict[int, list[int]] = {}
    orphans: list[int] = []
    for li, line in enumerate(text_lines):
        best, best_ratio = -1, 0.0
        for ri, region in enumerate(regions):
            if region.category in FURNITURE:
                continue
            ratio = overlap_ratio(line.bbox, region.bbox)
            if ratio > best_ratio:
                best, best_ratio = ri, ratio
        if best >= 0 and best_ratio >= MIN_OVERLAP:
            buckets.setdefault(best, []).append(li)
        else:
            orphans.append(li)

    def ordered(indices: list[int]) -> list[int]:
        perm = sort_tb_yx([text_lines[i].bbox for i in indices], config)
        return [indices[k] for k in perm]

    return {ri: ordered(ids) for ri, ids in sorted(buckets.items())}, ordered(orphans)


def _free_gaps(spans: list[tuple[float, float]], lo: float, hi: float) -> list[tuple[float, float]]:
    gaps = []
    cursor = lo
    for a, b in sorted(spans):
        if b <= cursor:
            continue
        if a >= hi:
            break
        if a > cursor:
            gaps.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < hi:
        gaps.append((cursor, hi))
    return gaps


def find_gutter(regions: Sequence[LayoutRegion], page_width: float) -> tuple[float, float] | None:
    """The widest free vertical band in the middle of the page, if any.

    Only body regions narrower than the central band can block it; regions
    covering the whole band are section breaks (titles, wide figures). A
    gutter also needs at least one body region on each side.
    """
    lo, hi = GUTTER_LO * page_width, GUTTER_HI * page_width
    blocking = [
        r.bbox for r in regions
        if r.category not in FURNITURE and not (r.bbox.x0 < lo and r.bbox.x1 > hi)
    ]
    gaps = [g for g in _free_gaps([(b.x0, b.x1) for b in blocking], lo, hi)
            if g[1] - g[0] >= GUTTER_MIN_WIDTH * page_width]
    if not gaps:
        return None
    gap = max(gaps, key=lambda g: (g[1] - g[0], -g[0]))
    left = any(b.x1 <= gap[0] for b in blocking)
    right = any(b.x0 >= gap[1] for b in blocking)
    return gap if left and right else None


def detect_columns(regions: Sequence[LayoutRegion], page_width: float) -> list[int]:
    """Column of each region: ``LEFT``/``RIGHT``, or ``SPANNING`` across the gutter.

    Single-column pages put every region in ``LEFT``.
    """
    gap = find_gutter(regions, page_width)
    if gap is None:
        return [LEFT] * len(regions)
    mid = (gap[0] + gap[1]) / 2
    cols = []
    for r in regions:
        if r.bbox.x0 < gap[1] and r.bbox.x1 > gap[0]:
            cols.append(SPANNING)
        else:
            cols.append(LEFT if r.bbox.cx < mid else RIGHT)
    return cols


def order_regions(
    regions: Sequence[LayoutRegion],
    config: OrderConfig | None = None,
    page_size: tuple[float, float] | None = None,
) -> list[int]:
    """Reading order of regions as a permutation.

    Single-column pages use :func:`sort_tb_yx` directly. On two-column
    pages spanning regions cut the page into sections; within a section the
    whole left column is read before the right one.
    """
    config = config or OrderConfig()
    boxes = [r.bbox for r in regions]
    width = page_size[0] if page_size else max((b.x1 for b in boxes), default=0.0)
    cols = detect_columns(regions, width) if width > 0 else [LEFT] * len(regions)
    if all(c == LEFT for c in cols):
        return sort_tb_yx(boxes, config)
    fixed = OrderConfig.fixed(config.resolve(boxes))

    def tbyx(indices: list[int]) -> list[int]:
        perm = sort_tb_yx([boxes[i] for i in indices], fixed)
        return [indices[k] for k in perm]

    breaks = sorted((i for i, c in enumerate(cols) if c == SPANNING),
                    key=lambda i: (boxes[i].y0, boxes[i].x0, i))
    sections: list[tuple[list[int], list[int]]] = [([], []) for _ in range(len(breaks) + 1)]
    for i, c in enumerate(cols):
        if c == SPANNING:
            continue
        k = sum(1 for b in breaks if boxes[b].y0 <= boxes[i].y0)
        sections[k][c].append(i)
    order: list[int] = []
    for k, (left, right) in enumerate(sections):
        order += tbyx(left) + tbyx(right)
        if k < len(breaks):
            order.append(breaks[k])
    return order

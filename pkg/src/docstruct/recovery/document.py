"""Assemble a page bundle into an ordered :class:`DocumentModel`."""

from __future__ import annotations

import logging
import math
from collections import Counter
from typing import Sequence

from ..geometry import Box, OrderConfig, group_lines, sort_tb_yx
from ..table.grid import Cell, TableGrid
from .layout import assign_text_to_regions, order_regions
from .model import (
    FURNITURE,
    Block,
    DocumentModel,
    FigureBlock,
    Heading,
    ListBlock,
    PageBundle,
    Paragraph,
    TableBlock,
    TextLine,
)

log = logging.getLogger(__name__)

_PARAGRAPH_CATEGORIES = {"text", "reference", "equation"}
_CAPTION_TARGETS = {"table_caption": "table", "figure_caption": "figure"}


def _line_groups(lines: Sequence[TextLine], ids: list[int], config: OrderConfig) -> list[list[int]]:
    """Visual lines of ``ids``, each left to right, top to bottom overall."""
    boxes = [lines[i].bbox for i in ids]
    th = config.resolve(boxes)
    return [
        [ids[k] for k in sorted(group, key=lambda k: (boxes[k].x0, k))]
        for group in group_lines(boxes, th)
    ]


def _join(lines: Sequence[TextLine], ids: Sequence[int]) -> str:
    return " ".join(lines[i].text.strip() for i in ids if lines[i].text.strip())


def _grid_from_lines(lines: Sequence[TextLine], groups: list[list[int]]) -> TableGrid:
    cells = [
        Cell(r, c, text=lines[i].text.strip(), bbox=lines[i].bbox)
        for r, group in enumerate(groups)
        for c, i in enumerate(group)
    ]
    return TableGrid(len(groups), max((len(g) for g in groups), default=0), cells)


def _uncovered(lines: Sequence[TextLine], ids: list[int], grid: TableGrid) -> list[int]:
    """Lines of a table region whose words the recognised grid does not contain."""
    pool = Counter(w for cell in grid.cells for w in cell.text.split())
    missing = []
    for i in ids:
        words = Counter(lines[i].text.split())
        if words <= pool:
            pool -= words
        else:
            missing.append(i)
    return missing


def _distance(a: Box, b: Box) -> float:
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def build_document(bundle: PageBundle, config: OrderConfig | None = None) -> DocumentModel:
    """Turn layout regions, OCR lines and recognised tables into flow blocks.

    Blocks follow :func:`order_regions`. Captions are moved right after the
    nearest table or figure (by centre distance). Headers and footers emit
    no block; lines outside any body region, and lines of a recognised
    table that its cells do not account for, are appended as trailing
    paragraphs.
    """
    config = config or OrderConfig()
    lines = bundle.text_lines
    regions = bundle.regions
    assigned, orphans = assign_text_to_regions(lines, regions, config)
    doc = DocumentModel(title=bundle.name)

    placed: list[tuple[int, Block]] = []
    for ri in order_regions(regions, config, bundle.page_size):
        region = regions[ri]
        cat = region.category
        ids = assigned.get(ri, [])
        if cat in FURNITURE:
            continue
        block: Block | None = None
        if cat == "title":
            if ids:
                block = Heading(_join(lines, ids), 1, ri)
        elif cat in _PARAGRAPH_CATEGORIES:
            if ids:
                block = Paragraph(_join(lines, ids), "body", ri)
        elif cat in _CAPTION_TARGETS:
            if ids:
                block = Paragraph(_join(lines, ids), "caption", ri)
        elif cat == "list":
            if ids:
                block = ListBlock([_join(lines, g) for g in _line_groups(lines, ids, config)], ri)
        elif cat == "table":
            if ri in bundle.tables:
                block = TableBlock(bundle.tables[ri], ri)
                orphans += _uncovered(lines, ids, bundle.tables[ri])
            elif ids:
                block = TableBlock(_grid_from_lines(lines, _line_groups(lines, ids, config)), ri)
            else:
                msg = f"table region {ri} has neither a grid nor text; emitted as a figure"
                log.debug(msg)
                doc.warnings.append(msg)
                block = FigureBlock("table", region.bbox, "", ri)
        elif cat == "figure":
            block = FigureBlock("figure", region.bbox, _join(lines, ids), ri)
        if block is not None:
            placed.append((ri, block))

    doc.blocks = _attach_captions(placed, bundle)
    if orphans:
        perm = sort_tb_yx([lines[i].bbox for i in orphans], config)
        orphans = [orphans[k] for k in perm]
    doc.blocks += [Paragraph(lines[i].text.strip(), "orphan", None) for i in orphans if lines[i].text.strip()]
    return doc


def _attach_captions(placed: list[tuple[int, Block]], bundle: PageBundle) -> list[Block]:
    regions = bundle.regions
    order = [ri for ri, _ in placed]
    blocks = dict(placed)
    attached: set[int] = set()
    for ri, _ in placed:
        target_cat = _CAPTION_TARGETS.get(regions[ri].category)
        if target_cat is None:
            continue
        targets = [t for t in order if regions[t].category == target_cat]
        if not targets:
            continue
        target = min(targets, key=lambda t: (_distance(regions[ri].bbox, regions[t].bbox), order.index(t)))
        order.remove(ri)
        pos = order.index(target) + 1
        # captions attached earlier stay ahead of this one
        while pos < len(order) and order[pos] in attached:
            pos += 1
        order.insert(pos, ri)
        attached.add(ri)
    return [blocks[ri] for ri in order]

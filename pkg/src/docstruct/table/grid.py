"""Logical table grids and their token-stream encoding."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from ..errors import AlignmentError, TableStructureError
from ..geometry import Box
from . import tokens as T
from .tokens import MERGED, SPLIT, TokenKind, TokenSequence, check_nesting


@dataclass
class TableNode:
    """Document-order table element: ``table``, ``thead``, ``tbody``, ``tr`` or ``td``.

    ``th`` elements are represented as ``td``. Only ``td`` nodes carry text.
    """

    tag: str
    children: list[TableNode] = field(default_factory=list)
    rowspan: int = 1
    colspan: int = 1
    text: str = ""

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def iter_postorder(self):
        stack: list[tuple[TableNode, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded or not node.children:
                yield node
            else:
                stack.append((node, True))
                stack.extend((c, False) for c in reversed(node.children))


@dataclass
class Cell:
    row: int
    col: int
    rowspan: int = 1
    colspan: int = 1
    text: str = ""
    bbox: Box | None = None

    @property
    def spanning(self) -> bool:
        return self.rowspan > 1 or self.colspan > 1


@dataclass
class TableGrid:
    """Resolved row/column occupancy of a table.

    ``cells`` are kept in document (token) order, which is row-major by
    anchor position.
    """

    n_rows: int
    n_cols: int
    cells: list[Cell] = field(default_factory=list)
    header_rows: int = 0

    @property
    def has_spans(self) -> bool:
        return any(c.spanning for c in self.cells)

    def occupancy(self) -> list[list[int]]:
        """Matrix of owning cell index per position, ``-1`` where uncovered."""
        occ = [[-1] * self.n_cols for _ in range(self.n_rows)]
        for k, c in enumerate(self.cells):
            for r in range(c.row, c.row + c.rowspan):
                for q in range(c.col, c.col + c.colspan):
                    occ[r][q] = k
        return occ

    def rows(self) -> list[list[Cell]]:
        """Cells grouped by anchor row."""
        out: list[list[Cell]] = [[] for _ in range(self.n_rows)]
        for c in self.cells:
            out[c.row].append(c)
        return out


def _place_rows(rows: Sequence[Sequence[TableNode]], header_rows: int) -> TableGrid:
    occupied: set[tuple[int, int]] = set()
    cells: list[Cell] = []
    for r, row in enumerate(rows):
        c = 0
        for node in row:
            while (r, c) in occupied:
                c += 1
            for dr in range(node.rowspan):
                for dc in range(node.colspan):
                    pos = (r + dr, c + dc)
                    if pos in occupied:
                        raise TableStructureError(
                            f"cell at row {r} col {c} (span {node.rowspan}x{node.colspan}) "
                            f"overlaps position {pos}"
                        )
                    occupied.add(pos)
            cells.append(Cell(r, c, node.rowspan, node.colspan, node.text))
            c += node.colspan
    n_rows = max((x.row + x.rowspan for x in cells), default=0)
    n_cols = max((x.col + x.colspan for x in cells), default=0)
    return TableGrid(n_rows, n_cols, cells, min(header_rows, n_rows))


def resolve_tree(root: TableNode) -> TableGrid:
    """Place the cells of a table tree onto a grid.

    Each cell anchors at the leftmost free column of its row; row spans
    reserve positions in later rows. Overlaps are errors, never repaired.
    """
    rows: list[list[TableNode]] = []
    header_rows = 0
    for child in root.children:
        if child.tag == "tr":
            rows.append(child.children)
        else:
            section_rows = [tr.children for tr in child.children]
            if child.tag == "thead":
                header_rows += len(section_rows)
            rows.extend(section_rows)
    return _place_rows(rows, header_rows)


def tokens_to_tree(seq: TokenSequence | Sequence[T.StructureToken]) -> TableNode:
    """Build the document-order tree of a well-nested token stream."""
    toks = seq.tokens if isinstance(seq, TokenSequence) else tuple(seq)
    check_nesting(toks)
    K = TokenKind
    root = TableNode("table")
    parent = root
    row: TableNode | None = None
    i = 0
    while i < len(toks):
        k = toks[i].kind
        if k in (K.THEAD_OPEN, K.TBODY_OPEN):
            parent = TableNode("thead" if k is K.THEAD_OPEN else "tbody")
            root.children.append(parent)
        elif k in (K.THEAD_CLOSE, K.TBODY_CLOSE):
            parent = root
        elif k is K.TR_OPEN:
            row = TableNode("tr")
            parent.children.append(row)
        elif k in (K.TD_OPEN, K.TD_MERGED):
            assert row is not None
            row.children.append(TableNode("td"))
        elif k is K.TD_BRACKET_OPEN:
            assert row is not None
            cell = TableNode("td")
            i += 1
            while toks[i].kind is not K.TD_BRACKET_CLOSE:
                if toks[i].kind is K.ROWSPAN:
                    cell.rowspan = toks[i].span
                else:
                    cell.colspan = toks[i].span
                i += 1
            row.children.append(cell)
        i += 1
    return root


def tokens_to_grid(seq: TokenSequence | Sequence[T.StructureToken]) -> TableGrid:
    """Resolve a token stream (either vocabulary) into a grid."""
    return resolve_tree(tokens_to_tree(seq))


def check_grid(grid: TableGrid) -> None:
    """Raise :class:`TableStructureError` unless ``grid`` is valid.

    Valid means: spans >= 1, no overlaps, extents equal ``n_rows``/``n_cols``,
    and every cell sits where left-to-right placement would put it (so the
    grid survives a trip through tokens).
    """
    for c in grid.cells:
        if c.rowspan < 1 or c.colspan < 1 or c.row < 0 or c.col < 0:
            raise TableStructureError(f"invalid cell geometry {c}")
    order = sorted(range(len(grid.cells)), key=lambda k: (grid.cells[k].row, grid.cells[k].col))
    if order != list(range(len(grid.cells))):
        raise TableStructureError("cells are not in row-major anchor order")
    nodes: list[list[TableNode]] = [[] for _ in range(grid.n_rows)]
    for c in grid.cells:
        if c.row >= grid.n_rows:
            raise TableStructureError(f"cell anchored outside grid: {c}")
        nodes[c.row].append(TableNode("td", rowspan=c.rowspan, colspan=c.colspan))
    placed = _place_rows(nodes, grid.header_rows)
    if (placed.n_rows, placed.n_cols) != (grid.n_rows, grid.n_cols):
        raise TableStructureError(
            f"grid extent {grid.n_rows}x{grid.n_cols} does not match cells "
            f"({placed.n_rows}x{placed.n_cols})"
        )
    for want, got in zip(grid.cells, placed.cells):
        if (want.row, want.col) != (got.row, got.col):
            raise TableStructureError(
                f"cell at ({want.row},{want.col}) would be placed at ({got.row},{got.col})"
            )
    if not 0 <= grid.header_rows <= grid.n_rows:
        raise TableStructureError("header_rows out of range")


def _cell_tokens(cell: Cell, form: str) -> list[T.StructureToken]:
    if not cell.spanning:
        return [T.TD_MERGED] if form == MERGED else [T.TD_OPEN, T.TD_CLOSE]
    out = [T.TD_BRACKET_OPEN]
    if cell.rowspan > 1:
        out.append(T.rowspan(cell.rowspan))
    if cell.colspan > 1:
        out.append(T.colspan(cell.colspan))
    out += [T.TD_BRACKET_CLOSE, T.TD_CLOSE]
    return out


def grid_to_tokens(grid: TableGrid, form: str = MERGED) -> TokenSequence:
    """Canonical token stream: ``<thead>`` for header rows, ``<tbody>`` for the rest."""
    if form not in (SPLIT, MERGED):
        raise ValueError(f"unknown vocabulary form {form!r}")
    check_grid(grid)
    out: list[T.StructureToken] = [T.TABLE_OPEN]
    for section, lo, hi in _sections(grid):
        out.append(T.THEAD_OPEN if section == "thead" else T.TBODY_OPEN)
        for row in grid.rows()[lo:hi]:
            out.append(T.TR_OPEN)
            for cell in row:
                out.extend(_cell_tokens(cell, form))
            out.append(T.TR_CLOSE)
        out.append(T.THEAD_CLOSE if section == "thead" else T.TBODY_CLOSE)
    out.append(T.TABLE_CLOSE)
    return TokenSequence(tuple(out), form)


def _sections(grid: TableGrid) -> list[tuple[str, int, int]]:
    out = []
    if grid.header_rows:
        out.append(("thead", 0, grid.header_rows))
    if grid.n_rows > grid.header_rows or not grid.header_rows:
        out.append(("tbody", grid.header_rows, grid.n_rows))
    return out


def grid_to_tree(grid: TableGrid) -> TableNode:
    """Tree with the same canonical framing as :func:`grid_to_tokens`."""
    check_grid(grid)
    root = TableNode("table")
    rows = grid.rows()
    for section, lo, hi in _sections(grid):
        sec = TableNode(section)
        for row in rows[lo:hi]:
            sec.children.append(
                TableNode("tr", [TableNode("td", [], c.rowspan, c.colspan, c.text) for c in row])
            )
        root.children.append(sec)
    return root


def align_cells(seq: TokenSequence, bboxes: Sequence[Box | None], context: str = "") -> TableGrid:
    """Pair the i-th cell token with the i-th box."""
    grid = tokens_to_grid(seq)
    if len(grid.cells) != len(bboxes):
        raise AlignmentError(len(grid.cells), len(bboxes), context)
    grid.cells = [replace(c, bbox=b) for c, b in zip(grid.cells, bboxes)]
    return grid

"""Reading and writing table HTML.

The reader accepts the tag soup found in table datasets and model output:
``table/thead/tbody/tr/td/th`` with optional ``rowspan``/``colspan``, plus
inline markup inside cells which is dropped (its text is kept). Only the
five XML entities and numeric character references are decoded; anything
else is left verbatim.
"""

from __future__ import annotations

import html as _html
from html.parser import HTMLParser

from ..errors import TableParseError, TableStructureError
from .grid import TableGrid, TableNode, _sections, check_grid, resolve_tree

_NAMED = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'"}
_STRUCT = {"table", "thead", "tbody", "tr", "td", "th"}
_PARENTS = {
    "thead": ("table",),
    "tbody": ("table",),
    "tr": ("table", "thead", "tbody"),
    "td": ("tr",),
    "th": ("tr",),
}


def _span(value: str | None) -> int:
    if value is None:
        return 1
    value = value.strip().strip('"')
    return int(value) if value.isdigit() and int(value) >= 1 else 1


class _TableParser(HTMLParser):
    def __init__(self, source: str):
        super().__init__(convert_charrefs=False)
        self.source = source
        self.line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self.line_starts.append(i + 1)
        self.root: TableNode | None = None
        self.done = False
        # (original tag, node)
        self.stack: list[tuple[str, TableNode]] = []

    def byte_offset(self) -> int:
        line, col = self.getpos()
        char = self.line_starts[line - 1] + col
        return len(self.source[:char].encode("utf-8"))

    def _cell(self) -> TableNode | None:
        if self.stack and self.stack[-1][0] in ("td", "th"):
            return self.stack[-1][1]
        return None

    def handle_starttag(self, tag, attrs):
        if tag not in _STRUCT:
            return
        if tag == "table":
            if self.root is not None:
                what = "nested tables are not supported" if not self.done else "more than one table"
                raise TableStructureError(what, offset=self.byte_offset())
            self.root = TableNode("table")
            self.stack.append(("table", self.root))
            return
        if self.root is None or self.done:
            raise TableStructureError(f"<{tag}> outside <table>", offset=self.byte_offset())
        parent_tag, parent = self.stack[-1]
        if parent_tag not in _PARENTS[tag]:
            raise TableStructureError(f"<{tag}> not allowed inside <{parent_tag}>", offset=self.byte_offset())
        if tag in ("td", "th"):
            a = dict(attrs)
            node = TableNode("td", rowspan=_span(a.get("rowspan")), colspan=_span(a.get("colspan")))
        else:
            node = TableNode(tag)
        parent.children.append(node)
        self.stack.append((tag, node))

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag in _STRUCT:
            self.handle_endtag(tag)

    def handle_endtag(self, tag):
        if tag not in _STRUCT:
            return
        if not self.stack:
            raise TableStructureError(f"unmatched </{tag}>", offset=self.byte_offset())
        top = self.stack[-1][0]
        if top != tag:
            raise TableStructureError(f"</{tag}> closes <{top}>", offset=self.byte_offset())
        self.stack.pop()
        if tag == "table":
            self.done = True

    def handle_data(self, data):
        cell = self._cell()
        if cell is not None:
            cell.text += data

    def handle_entityref(self, name):
        cell = self._cell()
        if cell is not None:
            cell.text += _NAMED.get(name, f"&{name};")

    def handle_charref(self, name):
        cell = self._cell()
        if cell is None:
            return
        try:
            code = int(name[1:], 16) if name[:1] in "xX" else int(name)
            cell.text += chr(code)
        except (ValueError, OverflowError):
            cell.text += f"&#{name};"


def parse_table_tree(source: str) -> TableNode:
    """Parse the table in ``source`` into a document-order tree."""
    parser = _TableParser(source)
    parser.feed(source)
    parser.close()
    if parser.root is None:
        raise TableParseError("no <table> element found")
    if parser.stack:
        raise TableStructureError(
            f"unclosed <{parser.stack[-1][0]}>", offset=len(source.encode("utf-8"))
        )
    return parser.root


def parse_html_table(source: str) -> TableGrid:
    """Parse table HTML into a grid with cell text."""
    return resolve_tree(parse_table_tree(source))


def _open_td(rowspan: int, colspan: int) -> str:
    attrs = ""
    if rowspan > 1:
        attrs += f' rowspan="{rowspan}"'
    if colspan > 1:
        attrs += f' colspan="{colspan}"'
    return f"<td{attrs}>"


def table_to_html(grid: TableGrid) -> str:
    """Minimal HTML for ``grid``; cell text is escaped."""
    check_grid(grid)
    rows = grid.rows()
    parts = ["<table>"]
    for section, lo, hi in _sections(grid):
        parts.append(f"<{section}>")
        for row in rows[lo:hi]:
            parts.append("<tr>")
            for c in row:
                parts.append(_open_td(c.rowspan, c.colspan))
                parts.append(_html.escape(c.text, quote=False))
                parts.append("</td>")
            parts.append("</tr>")
        parts.append(f"</{section}>")
    parts.append("</table>")
    return "".join(parts)

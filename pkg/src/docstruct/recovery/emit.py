"""Serialise a :class:`DocumentModel` as editable HTML or Markdown."""

from __future__ import annotations

from html import escape

from ..table.html import table_to_html
from .model import DocumentModel, FigureBlock, Heading, ListBlock, Paragraph, TableBlock


def _figure_attrs(block: FigureBlock) -> str:
    b = block.bbox
    coords = ",".join(f"{v:g}" for v in (b.x0, b.y0, b.x1, b.y1))
    return f'class="figure" data-label="{escape(block.label)}" data-bbox="{coords}"'


def emit_html(doc: DocumentModel) -> str:
    """Standalone UTF-8 HTML page, one element per block, in block order."""
    body: list[str] = []
    for block in doc.blocks:
        if isinstance(block, Heading):
            level = min(max(block.level, 1), 6)
            body.append(f"<h{level}>{escape(block.text, quote=False)}</h{level}>")
        elif isinstance(block, Paragraph):
            cls = "" if block.role == "body" else f' class="{block.role}"'
            body.append(f"<p{cls}>{escape(block.text, quote=False)}</p>")
        elif isinstance(block, ListBlock):
            items = "".join(f"<li>{escape(item, quote=False)}</li>" for item in block.items)
            body.append(f"<ul>{items}</ul>")
        elif isinstance(block, TableBlock):
            body.append(table_to_html(block.grid))
        elif isinstance(block, FigureBlock):
            body.append(f"<div {_figure_attrs(block)}>{escape(block.text, quote=False)}</div>")
        else:
            raise TypeError(f"unknown block type {type(block).__name__}")
    return (
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        f"<title>{escape(doc.title, quote=False)}</title>\n</head>\n<body>\n"
        + "".join(line + "\n" for line in body)
        + "</body>\n</html>\n"
    )


def _md_cell(text: str) -> str:
    return " ".join(text.split()).replace("|", "\\|")


def _pipe_table(block: TableBlock) -> str:
    grid = block.grid
    rows = []
    for cells in grid.rows():
        texts = [""] * grid.n_cols
        for c in cells:
            texts[c.col] = _md_cell(c.text)
        rows.append("| " + " | ".join(texts) + " |")
    if not rows:
        return ""
    sep = "| " + " | ".join(["---"] * grid.n_cols) + " |"
    return "\n".join([rows[0], sep] + rows[1:])


def emit_markdown(doc: DocumentModel) -> str:
    """Markdown rendering; tables with spans fall back to embedded HTML."""
    parts: list[str] = []
    for block in doc.blocks:
        if isinstance(block, Heading):
            parts.append("#" * min(max(block.level, 1), 6) + " " + block.text)
        elif isinstance(block, Paragraph):
            parts.append(f"*{block.text}*" if block.role == "caption" else block.text)
        elif isinstance(block, ListBlock):
            parts.append("\n".join(f"- {item}" for item in block.items))
        elif isinstance(block, TableBlock):
            if block.grid.has_spans:
                parts.append(table_to_html(block.grid))
            else:
                parts.append(_pipe_table(block))
        elif isinstance(block, FigureBlock):
            parts.append(f"[{block.label}]" + (f" {block.text}" if block.text else ""))
        else:
            raise TypeError(f"unknown block type {type(block).__name__}")
    return "\n\n".join(p for p in parts if p) + ("\n" if parts else "")

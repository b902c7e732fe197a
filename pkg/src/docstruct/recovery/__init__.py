"""Layout recovery: page analysis results to editable HTML/Markdown."""

from .document import build_document
from .emit import emit_html, emit_markdown
from .layout import LEFT, RIGHT, SPANNING, assign_text_to_regions, detect_columns, order_regions
from .model import (
    REGION_CATEGORIES,
    DocumentModel,
    FigureBlock,
    Heading,
    LayoutRegion,
    ListBlock,
    PageBundle,
    Paragraph,
    TableBlock,
    TextLine,
)

__all__ = [
    "DocumentModel",
    "FigureBlock",
    "Heading",
    "LEFT",
    "LayoutRegion",
    "ListBlock",
    "PageBundle",
    "Paragraph",
    "REGION_CATEGORIES",
    "RIGHT",
    "SPANNING",
    "TableBlock",
    "TextLine",
    "assign_text_to_regions",
    "build_document",
    "detect_columns",
    "emit_html",
    "emit_markdown",
    "order_regions",
]

"""Page bundles in, flow documents out."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Union

from ..errors import ValidationError
from ..geometry import Box
from ..table.grid import TableGrid

REGION_CATEGORIES = frozenset({
    "text", "title", "list", "table", "figure",
    "figure_caption", "table_caption", "header", "footer", "reference", "equation",
})
# Page furniture: never part of the body flow.
FURNITURE = frozenset({"header", "footer"})


@dataclass(frozen=True)
class LayoutRegion:
    category: str
    bbox: Box
    score: float = 1.0

    def __post_init__(self) -> None:
        if self.category not in REGION_CATEGORIES:
            raise ValidationError(f"unknown region category {self.category!r}")


class TextLine(NamedTuple):
    bbox: Box
    text: str


@dataclass
class PageBundle:
    """Everything known about one page image."""

    page_size: tuple[float, float]
    regions: list[LayoutRegion] = field(default_factory=list)
    text_lines: list[TextLine] = field(default_factory=list)
    tables: dict[int, TableGrid] = field(default_factory=dict)
    name: str = "page"

    def __post_init__(self) -> None:
        w, h = self.page_size
        if not (w > 0 and h > 0):
            raise ValidationError(f"page size must be positive, got {self.page_size}")
        for idx in self.tables:
            if not 0 <= idx < len(self.regions):
                raise ValidationError(f"table entry for missing region {idx}")
            if self.regions[idx].category != "table":
                raise ValidationError(
                    f"table entry for region {idx} of category {self.regions[idx].category!r}"
                )


@dataclass
class Heading:
    text: str
    level: int = 1
    region: int | None = None


@dataclass
class Paragraph:
    text: str
    # body, caption or orphan
    role: str = "body"
    region: int | None = None


@dataclass
class ListBlock:
    items: list[str]
    region: int | None = None


@dataclass
class TableBlock:
    grid: TableGrid
    region: int | None = None


@dataclass
class FigureBlock:
    label: str
    bbox: Box
    text: str = ""
    region: int | None = None


Block = Union[Heading, Paragraph, ListBlock, TableBlock, FigureBlock]


@dataclass
class DocumentModel:
    blocks: list[Block] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    title: str = ""

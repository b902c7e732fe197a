"""Deterministic core of a document-structure pipeline.

Reading order, table-structure grammar, TEDS metrics, evaluation harnesses
and layout recovery.
"""

from .errors import (
    AlignmentError,
    DocstructError,
    SchemaError,
    TableParseError,
    TableStructureError,
    ValidationError,
)
from .geometry import Box, OrderConfig, default_threshold, group_lines, iou, sort_tb_yx, sort_yx

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "Box",
    "DocstructError",
    "OrderConfig",
    "SchemaError",
    "TableParseError",
    "TableStructureError",
    "ValidationError",
    "default_threshold",
    "group_lines",
    "iou",
    "sort_tb_yx",
    "sort_yx",
]

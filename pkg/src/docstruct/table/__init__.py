"""Table structure grammar: tokens, grids, HTML."""

from .grid import (
    Cell,
    TableGrid,
    TableNode,
    align_cells,
    check_grid,
    grid_to_tokens,
    grid_to_tree,
    resolve_tree,
    tokens_to_grid,
    tokens_to_tree,
)
from .html import parse_html_table, parse_table_tree, table_to_html
from .tokens import (
    MERGED,
    SPLIT,
    StructureToken,
    TokenKind,
    TokenSequence,
    check_nesting,
    merge_td_tokens,
    merge_token_strings,
    parse_token,
    split_td_tokens,
)

__all__ = [
    "Cell",
    "MERGED",
    "SPLIT",
    "StructureToken",
    "TableGrid",
    "TableNode",
    "TokenKind",
    "TokenSequence",
    "align_cells",
    "check_grid",
    "check_nesting",
    "grid_to_tokens",
    "grid_to_tree",
    "merge_td_tokens",
    "merge_token_strings",
    "parse_html_table",
    "parse_table_tree",
    "parse_token",
    "resolve_tree",
    "split_td_tokens",
    "table_to_html",
    "tokens_to_grid",
    "tokens_to_tree",
]

"""Tree-edit-distance similarity for tables (TEDS and TEDS-Struct).

A table becomes an ordered tree ``table > [thead|tbody] > tr > td``. Two
trees are compared by the exact ordered tree edit distance with unit
insert/delete cost and a rename cost of 1 when tag or spans differ. Cells
with matching structure pay the normalised Levenshtein distance of their
text, or nothing when content is ignored (TEDS-Struct). The similarity is
``1 - distance / max(|T1|, |T2|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import _ted_kernel
from .errors import DocstructError
from .table.grid import TableGrid, TableNode, grid_to_tree, tokens_to_tree
from .table.html import parse_table_tree
from .table.tokens import TokenSequence

__all__ = [
    "TedsNode",
    "CostConfig",
    "PreparedTree",
    "TedsScore",
    "build_tree",
    "normalized_levenshtein",
    "tree_edit_distance",
    "teds",
    "teds_struct",
    "score_pair",
]

TedsNode = TableNode

TableSource = Union[str, TableGrid, TokenSequence, TableNode]

LEVENSHTEIN = "levenshtein"
IGNORED = "ignored"


@dataclass(frozen=True)
class CostConfig:
    structural_mismatch_cost: float = 1.0
    content_cost_mode: str = LEVENSHTEIN

    def __post_init__(self) -> None:
        if self.structural_mismatch_cost < 0:
            raise ValueError("costs must be >= 0")
        if self.content_cost_mode not in (LEVENSHTEIN, IGNORED):
            raise ValueError(f"unknown content_cost_mode {self.content_cost_mode!r}")


FULL = CostConfig()
STRUCT_ONLY = CostConfig(content_cost_mode=IGNORED)


def build_tree(source: TableSource) -> TedsNode:
    """Tree for table HTML, a grid, a token stream, or an existing tree.

    HTML keeps its own framing (a table without ``<tbody>`` yields no tbody
    node); grids and tokens use their canonical framing.
    """
    if isinstance(source, TableNode):
        return source
    if isinstance(source, str):
        return parse_table_tree(source)
    if isinstance(source, TableGrid):
        return grid_to_tree(source)
    if isinstance(source, TokenSequence):
        return tokens_to_tree(source)
    raise TypeError(f"cannot build a table tree from {type(source).__name__}")


def normalized_levenshtein(a: str, b: str) -> float:
    """Levenshtein distance divided by the longer length; 0 for two empty strings."""
    if not a and not b:
        return 0.0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1] / max(len(a), len(b))


class PreparedTree:
    """A tree flattened to postorder arrays for the distance kernel.

    Preparing once and reusing the result saves work when the same tree is
    scored twice (TEDS and TEDS-Struct).
    """

    __slots__ = ("size", "lmld", "keyroots", "keys", "is_td", "offsets", "text")

    def __init__(self, root: TedsNode):
        nodes = list(root.iter_postorder())
        index = {id(n): k for k, n in enumerate(nodes)}
        n = len(nodes)
        lmld = np.empty(n, dtype=np.int64)
        for k, node in enumerate(nodes):
            lmld[k] = lmld[index[id(node.children[0])]] if node.children else k
        last_for_leaf: dict[int, int] = {}
        for k in range(n):
            last_for_leaf[int(lmld[k])] = k
        self.size = n
        self.lmld = lmld
        self.keyroots = np.array(sorted(last_for_leaf.values()), dtype=np.int64)
        self.keys = [(node.tag, node.rowspan, node.colspan) for node in nodes]
        self.is_td = np.array([node.tag == "td" for node in nodes], dtype=np.bool_)
        codes: list[int] = []
        offsets = [0]
        for node in nodes:
            if node.tag == "td":
                codes.extend(map(ord, node.text))
            offsets.append(len(codes))
        self.offsets = np.array(offsets, dtype=np.int64)
        self.text = np.array(codes, dtype=np.int32)


def _prepare(tree: TedsNode | PreparedTree) -> PreparedTree:
    return tree if isinstance(tree, PreparedTree) else PreparedTree(tree)


def _labels(t1: PreparedTree, t2: PreparedTree) -> tuple[np.ndarray, np.ndarray]:
    table: dict[tuple, int] = {}
    l1 = np.array([table.setdefault(k, len(table)) for k in t1.keys], dtype=np.int64)
    l2 = np.array([table.setdefault(k, len(table)) for k in t2.keys], dtype=np.int64)
    return l1, l2


def tree_edit_distance(
    t1: TedsNode | PreparedTree,
    t2: TedsNode | PreparedTree,
    cost: CostConfig = FULL,
) -> float:
    """Exact minimal edit cost turning ``t1`` into ``t2`` (Zhang-Shasha)."""
    p1, p2 = _prepare(t1), _prepare(t2)
    c = float(cost.structural_mismatch_cost)
    if p1.size == 0 or p2.size == 0:
        return c * (p1.size + p2.size)
    l1, l2 = _labels(p1, p2)
    return float(
        _ted_kernel.tree_distance(
            p1.lmld, p1.keyroots, l1, p1.is_td, p1.offsets, p1.text,
            p2.lmld, p2.keyroots, l2, p2.is_td, p2.offsets, p2.text,
            c, cost.content_cost_mode == LEVENSHTEIN,
        )
    )


def similarity(t1: TedsNode | PreparedTree, t2: TedsNode | PreparedTree, cost: CostConfig = FULL) -> float:
    p1, p2 = _prepare(t1), _prepare(t2)
    longest = max(p1.size, p2.size)
    if longest == 0:
        return 1.0
    return 1.0 - tree_edit_distance(p1, p2, cost) / longest


class TedsScore(NamedTuple):
    score: float
    pred_failed: bool


def score_pair(pred: TableSource | PreparedTree | None, gt: TableSource | PreparedTree, cost: CostConfig = FULL) -> TedsScore:
    """Score one prediction; an unparseable prediction scores 0 and is flagged.

    Ground-truth parse errors propagate.
    """
    gt_tree = gt if isinstance(gt, PreparedTree) else PreparedTree(build_tree(gt))
    if pred is None:
        return TedsScore(0.0, True)
    try:
        pred_tree = pred if isinstance(pred, PreparedTree) else PreparedTree(build_tree(pred))
    except DocstructError:
        return TedsScore(0.0, True)
    return TedsScore(similarity(pred_tree, gt_tree, cost), False)


def teds(pred: TableSource | None, gt: TableSource) -> float:
    """TEDS score in [0, 1], content-aware."""
    return score_pair(pred, gt, FULL).score


def teds_struct(pred: TableSource | None, gt: TableSource) -> float:
    """TEDS with cell text ignored."""
    return score_pair(pred, gt, STRUCT_ONLY).score

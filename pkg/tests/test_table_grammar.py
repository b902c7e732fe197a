from __future__ import annotations

import random

import pytest

from docstruct.errors import AlignmentError, TableParseError, TableStructureError
from docstruct.geometry import Box
from docstruct.table import (
    MERGED,
    SPLIT,
    Cell,
    TableGrid,
    TokenKind,
    TokenSequence,
    align_cells,
    check_grid,
    grid_to_tokens,
    merge_td_tokens,
    merge_token_strings,
    parse_html_table,
    parse_table_tree,
    parse_token,
    split_td_tokens,
    table_to_html,
    tokens_to_grid,
)

from generators import random_grid
from oracles import occupancy

SPAN_TOKENS = ["<tr>", "<td", ' rowspan="2"', ">", "</td>", "<td></td>", "</tr>", "<tr>", "<td></td>", "</tr>"]


def structure(grid: TableGrid):
    return [(c.row, c.col, c.rowspan, c.colspan) for c in grid.cells], grid.n_rows, grid.n_cols, grid.header_rows


def test_parse_token_accepts_vocabulary():
    assert parse_token("<td></td>").kind is TokenKind.TD_MERGED
    tok = parse_token('colspan="3"')
    assert tok.kind is TokenKind.COLSPAN and tok.span == 3 and tok.text == ' colspan="3"'


@pytest.mark.parametrize("bad", ["<div>", ' rowspan="1"', ' rowspan="x"', ""])
def test_parse_token_rejects(bad):
    with pytest.raises(TableParseError):
        parse_token(bad, 7)


def test_parse_error_names_token_index():
    with pytest.raises(TableParseError, match="token 3"):
        TokenSequence.from_strings(["<tr>", "<td>", "</td>", "<bogus>"])


def test_form_is_inferred_and_enforced():
    assert TokenSequence.from_strings(SPAN_TOKENS).form == MERGED
    assert TokenSequence.from_strings(["<tr>", "<td>", "</td>", "</tr>"]).form == SPLIT
    with pytest.raises(TableParseError):
        TokenSequence.from_strings(["<tr>", "<td>", "</td>", "<td></td>", "</tr>"])


def test_merge_and_split_keep_spanning_brackets():
    merged = TokenSequence.from_strings(SPAN_TOKENS)
    split = split_td_tokens(merged)
    assert split.to_strings() == ["<tr>", "<td", ' rowspan="2"', ">", "</td>", "<td>", "</td>", "</tr>",
                                  "<tr>", "<td>", "</td>", "</tr>"]
    assert merge_td_tokens(split) == merged
    assert split.n_cells == merged.n_cells == 3


def test_merge_rejects_bad_nesting():
    seq = TokenSequence.from_strings(["<tr>", "<td>", "</tr>"], SPLIT)
    with pytest.raises(TableParseError, match="token 1"):
        merge_td_tokens(seq)


@pytest.mark.parametrize("tokens", [
    ["<td></td>"],
    ["<tr>", "<td></td>"],
    ["<table>", "<tr>", "</tr>"],
    ["<tr>", "<td", ' rowspan="2"', ' rowspan="3"', ">", "</td>", "</tr>"],
    ["<tr>", "<td", ' rowspan="2"', "</td>", "</tr>"],
    ["<thead>", "<tr>", "</tr>", "</tbody>"],
])
def test_nesting_violations(tokens):
    with pytest.raises(TableParseError):
        tokens_to_grid(TokenSequence.from_strings(tokens))


def test_lenient_merge_never_raises():
    assert merge_token_strings(["<td>", "</td>", "<td>", "<weird>"]) == ["<td></td>", "<td>", "<weird>"]
    assert merge_token_strings([]) == []


def test_tokens_to_grid_resolves_rowspan():
    grid = tokens_to_grid(TokenSequence.from_strings(SPAN_TOKENS))
    assert structure(grid) == ([(0, 0, 2, 1), (0, 1, 1, 1), (1, 1, 1, 1)], 2, 2, 0)
    assert grid.occupancy() == [[0, 1], [0, 2]]


def test_overlap_is_structure_error():
    toks = ["<tr>", "<td", ' colspan="2"', ">", "</td>", "</tr>", "<tr>", "<td", ' rowspan="2"', ">", "</td>",
            "</tr>", "<tr>", "<td></td>", "<td></td>", "</tr>"]
    grid = tokens_to_grid(TokenSequence.from_strings(toks))
    # the row-2 cells flow right of the rowspan, so no overlap here
    assert structure(grid)[0][-2:] == [(2, 1, 1, 1), (2, 2, 1, 1)]
    bad = TableGrid(2, 2, [Cell(0, 0, 2, 1), Cell(1, 0)])
    with pytest.raises(TableStructureError):
        check_grid(bad)


def test_check_grid_requires_canonical_placement():
    with pytest.raises(TableStructureError):
        check_grid(TableGrid(1, 2, [Cell(0, 1)]))  # hole before a cell
    with pytest.raises(TableStructureError):
        check_grid(TableGrid(1, 2, [Cell(0, 1), Cell(0, 0)]))  # out of order
    with pytest.raises(TableStructureError):
        check_grid(TableGrid(1, 3, [Cell(0, 0)]))  # extents
    check_grid(TableGrid(2, 2, [Cell(0, 0), Cell(0, 1), Cell(1, 0)]))  # ragged end is fine


def test_header_rows_via_thead():
    grid = parse_html_table("<table><thead><tr><th>h</th></tr></thead><tbody><tr><td>x</td></tr></tbody></table>")
    assert grid.header_rows == 1
    assert grid_to_tokens(grid).to_strings() == [
        "<table>", "<thead>", "<tr>", "<td></td>", "</tr>", "</thead>",
        "<tbody>", "<tr>", "<td></td>", "</tr>", "</tbody>", "</table>"]


def test_html_entities_and_escaping():
    grid = parse_html_table("<table><tr><td>a &amp; b &lt;c&gt; &#233; &nbsp;</td></tr></table>")
    assert grid.cells[0].text == "a & b <c> é &nbsp;"
    html = table_to_html(grid)
    assert "a &amp; b &lt;c&gt;" in html
    assert parse_html_table(html).cells[0].text == grid.cells[0].text


def test_html_inline_markup_is_flattened():
    grid = parse_html_table("<table><tr><td><b>bold</b> x<sup>2</sup></td></tr></table>")
    assert grid.cells[0].text == "bold x2"


def test_html_errors():
    with pytest.raises(TableParseError):
        parse_html_table("<p>no table</p>")
    with pytest.raises(TableStructureError):
        parse_html_table("<table><tr><td>x</td></tr>")
    with pytest.raises(TableParseError, match="byte"):
        parse_html_table("<table><td>x</td></table>")
    with pytest.raises(TableParseError):
        parse_html_table("<table><tr><td><table></table></td></tr></table>")


def test_html_tree_keeps_its_own_framing():
    tree = parse_table_tree("<table><tr><td>x</td></tr></table>")
    assert tree.size() == 3


def test_align_cells_counts():
    seq = TokenSequence.from_strings(["<tr>", "<td></td>", "<td></td>", "</tr>"])
    grid = align_cells(seq, [Box(0, 0, 1, 1), None])
    assert grid.cells[0].bbox == Box(0, 0, 1, 1) and grid.cells[1].bbox is None
    with pytest.raises(AlignmentError, match="2 cell tokens vs 1 cell boxes"):
        align_cells(seq, [None])


def test_random_round_trips():
    rng = random.Random(11)
    for _ in range(300):
        grid = random_grid(rng)
        check_grid(grid)
        merged = grid_to_tokens(grid, MERGED)
        split = grid_to_tokens(grid, SPLIT)
        assert split_td_tokens(merged) == split
        assert merge_td_tokens(split) == merged
        assert structure(tokens_to_grid(merged)) == structure(grid)
        back = parse_html_table(table_to_html(grid))
        assert structure(back) == structure(grid)
        assert [c.text for c in back.cells] == [c.text for c in grid.cells]


def test_occupancy_matches_oracle():
    rng = random.Random(12)
    for _ in range(300):
        grid = random_grid(rng)
        rows = [[(c.rowspan, c.colspan) for c in row] for row in grid.rows()]
        placements, matrix = occupancy(rows)
        assert placements == [(c.row, c.col, c.rowspan, c.colspan) for c in grid.cells]
        occ = grid.occupancy()
        for r in range(grid.n_rows):
            for c in range(grid.n_cols):
                expect = matrix[r][c] if r < len(matrix) and c < len(matrix[r]) else -1
                assert occ[r][c] == expect

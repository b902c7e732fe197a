"""HTML structure-token vocabulary for tables.

Tokens follow the PubTabNet convention. A plain cell is either the pair
``<td>``, ``</td>`` (split vocabulary) or the single token ``<td></td>``
(merged vocabulary). A spanning cell is always written in bracket form::

    <td   rowspan="2"   colspan="3"   >   </td>

Only span-free cells are merged; spanning cells keep the bracket form in
both vocabularies.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from ..errors import TableParseError

SPLIT = "split"
MERGED = "merged"
FORMS = (SPLIT, MERGED)


class TokenKind(enum.Enum):
    TABLE_OPEN = "<table>"
    TABLE_CLOSE = "</table>"
    THEAD_OPEN = "<thead>"
    THEAD_CLOSE = "</thead>"
    TBODY_OPEN = "<tbody>"
    TBODY_CLOSE = "</tbody>"
    TR_OPEN = "<tr>"
    TR_CLOSE = "</tr>"
    TD_OPEN = "<td>"
    TD_CLOSE = "</td>"
    TD_MERGED = "<td></td>"
    TD_BRACKET_OPEN = "<td"
    TD_BRACKET_CLOSE = ">"
    ROWSPAN = "rowspan"
    COLSPAN = "colspan"


_SPAN_KINDS = (TokenKind.ROWSPAN, TokenKind.COLSPAN)
_BY_TEXT = {k.value: k for k in TokenKind if k not in _SPAN_KINDS}
_SPAN_RE = re.compile(r'^\s*(rowspan|colspan)\s*=\s*"?(\d+)"?\s*$')

# Tokens that open a cell, in any vocabulary.
CELL_OPENERS = frozenset({TokenKind.TD_OPEN, TokenKind.TD_MERGED, TokenKind.TD_BRACKET_OPEN})


@dataclass(frozen=True)
class StructureToken:
    kind: TokenKind
    span: int | None = None

    def __post_init__(self) -> None:
        if self.kind in _SPAN_KINDS:
            if self.span is None or self.span < 2:
                raise ValueError(f"{self.kind.value} token needs a span >= 2, got {self.span}")
        elif self.span is not None:
            raise ValueError(f"{self.kind.value} token takes no span")

    @property
    def text(self) -> str:
        if self.kind in _SPAN_KINDS:
            return f' {self.kind.value}="{self.span}"'
        return self.kind.value

    def __str__(self) -> str:
        return self.text


def parse_token(text: str, index: int | None = None) -> StructureToken:
    """Parse one PubTabNet token string such as ``'<td>'`` or ``' colspan="2"'``."""
    kind = _BY_TEXT.get(text.strip())
    if kind is not None:
        return StructureToken(kind)
    m = _SPAN_RE.match(text)
    if m:
        n = int(m.group(2))
        if n < 2:
            raise TableParseError(f"span value must be >= 2 in token {text!r}", index=index)
        return StructureToken(TokenKind(m.group(1)), n)
    raise TableParseError(f"unknown structure token {text!r}", index=index)


TABLE_OPEN = StructureToken(TokenKind.TABLE_OPEN)
TABLE_CLOSE = StructureToken(TokenKind.TABLE_CLOSE)
THEAD_OPEN = StructureToken(TokenKind.THEAD_OPEN)
THEAD_CLOSE = StructureToken(TokenKind.THEAD_CLOSE)
TBODY_OPEN = StructureToken(TokenKind.TBODY_OPEN)
TBODY_CLOSE = StructureToken(TokenKind.TBODY_CLOSE)
TR_OPEN = StructureToken(TokenKind.TR_OPEN)
TR_CLOSE = StructureToken(TokenKind.TR_CLOSE)
TD_OPEN = StructureToken(TokenKind.TD_OPEN)
TD_CLOSE = StructureToken(TokenKind.TD_CLOSE)
TD_MERGED = StructureToken(TokenKind.TD_MERGED)
TD_BRACKET_OPEN = StructureToken(TokenKind.TD_BRACKET_OPEN)
TD_BRACKET_CLOSE = StructureToken(TokenKind.TD_BRACKET_CLOSE)


def rowspan(n: int) -> StructureToken:
    return StructureToken(TokenKind.ROWSPAN, n)


def colspan(n: int) -> StructureToken:
    return StructureToken(TokenKind.COLSPAN, n)


@dataclass(frozen=True)
class TokenSequence:
    """An ordered structure-token stream tagged with its vocabulary form.

    A ``split`` sequence never contains ``<td></td>``; a ``merged`` sequence
    never contains a bare ``<td>``. Nesting is checked by the consumers
    (:func:`merge_td_tokens`, :func:`~docstruct.table.grid.tokens_to_grid`),
    not here, so predicted garbage can still be carried around.
    """

    tokens: tuple[StructureToken, ...]
    form: str = SPLIT

    def __post_init__(self) -> None:
        if self.form not in FORMS:
            raise ValueError(f"unknown vocabulary form {self.form!r}")
        object.__setattr__(self, "tokens", tuple(self.tokens))
        banned = TokenKind.TD_MERGED if self.form == SPLIT else TokenKind.TD_OPEN
        for i, tok in enumerate(self.tokens):
            if tok.kind is banned:
                raise TableParseError(f"{tok.text!r} not allowed in {self.form} form", index=i)

    @classmethod
    def from_strings(cls, strings: Iterable[str], form: str | None = None) -> TokenSequence:
        """Build from token strings, inferring the form when not given."""
        tokens = tuple(parse_token(s, i) for i, s in enumerate(strings))
        if form is None:
            form = MERGED if any(t.kind is TokenKind.TD_MERGED for t in tokens) else SPLIT
        return cls(tokens, form)

    def to_strings(self) -> list[str]:
        return [t.text for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[StructureToken]:
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    @property
    def n_cells(self) -> int:
        return sum(1 for t in self.tokens if t.kind in CELL_OPENERS)


def check_nesting(tokens: Sequence[StructureToken]) -> None:
    """Raise :class:`TableParseError` naming the first token that breaks nesting.

    Grammar (``<table>`` framing optional, PubTabNet records omit it)::

        table := [<table>] (section | row)* [</table>]
        section := (<thead> | <tbody>) row* (</thead> | </tbody>)
        row := <tr> cell* </tr>
        cell := <td> </td> | <td></td> | <td attr* > </td>
    """
    K = TokenKind
    n = len(tokens)
    i = 0
    framed = n > 0 and tokens[0].kind is K.TABLE_OPEN
    if framed:
        i = 1
    section: TokenKind | None = None
    in_row = False
    while i < n:
        k = tokens[i].kind
        if in_row:
            if k is K.TR_CLOSE:
                in_row = False
            elif k is K.TD_MERGED:
                pass
            elif k is K.TD_OPEN:
                if i + 1 >= n or tokens[i + 1].kind is not K.TD_CLOSE:
                    raise TableParseError("<td> must be followed by </td>", index=i)
                i += 1
            elif k is K.TD_BRACKET_OPEN:
                j = i + 1
                seen: set[TokenKind] = set()
                while j < n and tokens[j].kind in _SPAN_KINDS:
                    if tokens[j].kind in seen:
                        raise TableParseError(f"duplicate {tokens[j].kind.value} attribute", index=j)
                    seen.add(tokens[j].kind)
                    j += 1
                if j >= n or tokens[j].kind is not K.TD_BRACKET_CLOSE:
                    raise TableParseError("unterminated <td bracket", index=j if j < n else i)
                if j + 1 >= n or tokens[j + 1].kind is not K.TD_CLOSE:
                    raise TableParseError("spanning cell must be closed by </td>", index=j + 1 if j + 1 < n else j)
                i = j + 1
            else:
                raise TableParseError(f"unexpected {tokens[i].text!r} inside row", index=i)
        elif k is K.TR_OPEN:
            in_row = True
        elif k in (K.THEAD_OPEN, K.TBODY_OPEN) and section is None:
            section = k
        elif section is not None and (
            (k is K.THEAD_CLOSE and section is K.THEAD_OPEN)
            or (k is K.TBODY_CLOSE and section is K.TBODY_OPEN)
        ):
            section = None
        elif k is K.TABLE_CLOSE and framed and section is None and i == n - 1:
            framed = False
        else:
            where = "row" if k in CELL_OPENERS or k is K.TD_CLOSE else "table"
            raise TableParseError(f"unexpected {tokens[i].text!r} outside {where}", index=i)
        i += 1
    if in_row:
        raise TableParseError("unclosed <tr>", index=n)
    if section is not None:
        raise TableParseError(f"unclosed {section.value}", index=n)
    if framed:
        raise TableParseError("missing </table>", index=n)


def merge_td_tokens(seq: TokenSequence) -> TokenSequence:
    """Collapse every span-free ``<td>``, ``</td>`` pair into ``<td></td>``."""
    check_nesting(seq.tokens)
    out: list[StructureToken] = []
    toks = seq.tokens
    i = 0
    while i < len(toks):
        if toks[i].kind is TokenKind.TD_OPEN:
            out.append(TD_MERGED)
            i += 2
        else:
            out.append(toks[i])
            i += 1
    return TokenSequence(tuple(out), MERGED)


def split_td_tokens(seq: TokenSequence) -> TokenSequence:
    """Inverse of :func:`merge_td_tokens`."""
    check_nesting(seq.tokens)
    out: list[StructureToken] = []
    for tok in seq.tokens:
        if tok.kind is TokenKind.TD_MERGED:
            out.extend((TD_OPEN, TD_CLOSE))
        else:
            out.append(tok)
    return TokenSequence(tuple(out), SPLIT)


def merge_token_strings(strings: Sequence[str]) -> list[str]:
    """Lenient merge on raw strings; never raises.

    Used to normalise model output before exact-match comparison, where the
    prediction may not even be well nested.
    """
    out: list[str] = []
    i = 0
    while i < len(strings):
        if strings[i] == "<td>" and i + 1 < len(strings) and strings[i + 1] == "</td>":
            out.append("<td></td>")
            i += 2
        else:
            out.append(strings[i])
            i += 1
    return out

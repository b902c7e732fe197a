"""Exception hierarchy shared by all docstruct modules."""

from __future__ import annotations


class DocstructError(Exception):
    """Base class for every error raised by this package."""


class TableParseError(DocstructError):
    """A token stream or HTML string could not be parsed.

    ``index`` is the offending token index (token input) and ``offset`` the
    UTF-8 byte offset (HTML input); whichever does not apply is ``None``.
    """

    def __init__(self, message: str, *, index: int | None = None, offset: int | None = None):
        where = []
        if index is not None:
            where.append(f"token {index}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} (at {', '.join(where)})" if where else message)
        self.index = index
        self.offset = offset


class TableStructureError(TableParseError):
    """Well-formed input that does not describe a valid table layout."""


class AlignmentError(DocstructError):
    """Cell tokens and cell boxes cannot be paired one-to-one."""

    def __init__(self, n_cells: int, n_boxes: int, context: str = ""):
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}{n_cells} cell tokens vs {n_boxes} cell boxes")
        self.n_cells = n_cells
        self.n_boxes = n_boxes


class ValidationError(DocstructError, ValueError):
    """Input data violates a documented invariant."""


class SchemaError(ValidationError):
    """A record in an input file does not follow its schema.

    Carries file and line (or record index) provenance.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line
        self.reason = message

"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`CircumplexEvalError`, which is what the CLI maps to exit code 1.
"""
from __future__ import annotations


class CircumplexEvalError(Exception):
    """Base class for domain errors."""


class RatingRangeError(CircumplexEvalError, ValueError):
    def __init__(self, name: str, value: object):
        self.name = name
        self.value = value
        super().__init__(f"rating {name}={value!r} outside [0, 1]")


class IncompleteRecordError(CircumplexEvalError):
    def __init__(self, prompt: str, respondent_id: str = "", candidate: str = ""):
        self.prompt = prompt
        self.respondent_id = respondent_id
        self.candidate = candidate
        where = f" (respondent {respondent_id}, candidate {candidate})" if respondent_id else ""
        super().__init__(f"incomplete record: missing prompt {prompt!r}{where}")


class EmptyPopulationError(CircumplexEvalError):
    def __init__(self, group: str):
        self.group = group
        super().__init__(f"empty population for group {group!r}")


class IngestError(CircumplexEvalError):
    """A malformed input row; ``row`` is the 1-based file line (header is line 1)."""

    def __init__(self, message: str, row: int | None = None, path: str | None = None):
        self.row = row
        self.path = path
        self.detail = message
        loc = ""
        if path:
            loc += f"{path}: "
        if row is not None:
            loc += f"row {row}: "
        super().__init__(loc + message)


class ConfigError(CircumplexEvalError):
    pass


class RankTestError(CircumplexEvalError, ValueError):
    pass


class SchemaError(CircumplexEvalError):
    pass


class SelectionError(CircumplexEvalError):
    pass

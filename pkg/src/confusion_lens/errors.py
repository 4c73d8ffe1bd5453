"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: usage errors -> 1, data errors -> 2,
backend errors -> 3.
"""


class ConfusionLensError(Exception):
    """Base class for all package errors."""


class DataError(ConfusionLensError):
    """Malformed or inconsistent input data (corpus, cache, fixtures, CSV)."""


class CorpusError(DataError):
    """Corpus file violates the JSONL schema or an invariant."""


class AlignmentError(DataError):
    """Token pieces could not be aligned to the source text."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class BackendError(ConfusionLensError):
    """Logprob backend unreachable or returned an unusable response."""


class ParseError(DataError):
    """Snippet source could not be parsed into an AST."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class StatsError(ConfusionLensError):
    """Statistical routine preconditions violated (e.g. all-zero differences)."""

"""Exception types shared across the library.

Structured failures carry their payload (witness, trace, byte offset) as
attributes so callers can report without string parsing.
"""

from __future__ import annotations


class TrimonoError(Exception):
    """Base class for all library errors."""


class PreconditionViolated(TrimonoError):
    """An operation was called outside its stated contract."""


class SearchBudgetExceeded(TrimonoError):
    """A best-effort search ran out of budget. Carries the best witness found."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExceeded(TrimonoError):
    """An exhaustive oracle would exceed its subset or time budget."""


class ExtractionError(TrimonoError):
    """Base for structured extraction failures; carries the trace so far."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class StrictSizeUnderflow(ExtractionError):
    """A strict-schedule size floored to zero; message names the quantity."""


class StrictBoundMissed(ExtractionError):
    """A strict-mode bookkeeping bound failed to hold."""


class ReservoirExhausted(ExtractionError):
    """The surviving vertex pool became too small to continue."""


class CliqueNotFound(ExtractionError):
    """Adaptive extraction hit its round cap without a usable clique."""


class ColoringFileError(TrimonoError):
    """Base for tc3 file format errors."""


class MalformedHeader(ColoringFileError):
    pass


class VersionMismatch(ColoringFileError):
    pass


class TruncatedPayload(ColoringFileError):
    pass


class PayloadError(ColoringFileError):
    """Invalid payload byte; carries the absolute byte offset in the file."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset

"""Exception types and non-fatal problem records."""

from __future__ import annotations

from dataclasses import dataclass


class NativeRiskError(Exception):
    """Base class for all errors raised by this package."""


# apk ingestion
class NotAnArchive(NativeRiskError):
    pass


class IoFailure(NativeRiskError, OSError):
    pass


# elf analysis
class NotAnElf(NativeRiskError):
    pass


class MalformedElf(NativeRiskError):
    pass


# signatures
class SignatureError(NativeRiskError):
    pass


class DuplicateProduct(SignatureError):
    pass


class EmptySignature(SignatureError):
    pass


class SignatureParseError(SignatureError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# cve database
class UnrecognizedFeedFormat(NativeRiskError):
    pass


class UnknownProduct(NativeRiskError, KeyError):
    pass


# risk engine
class OutOfRange(NativeRiskError, ValueError):
    pass


class MissingReleaseDate(NativeRiskError):
    pass


@dataclass(frozen=True)
class CorruptEntry:
    """An archive member that could not be decompressed."""

    archive_path: str
    reason: str


@dataclass(frozen=True)
class MalformedSidecarRow:
    line: int
    reason: str


@dataclass(frozen=True)
class SkippedRecord:
    """A feed record dropped during ingestion or database building."""

    source: str
    cve_id: str | None
    reason: str

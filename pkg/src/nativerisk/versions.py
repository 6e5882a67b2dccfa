"""Library version numbers and the constraints CVE entries place on them.

A version is a run of dotted non-negative integers with an optional
alphanumeric suffix, e.g. ``1.6.37`` or OpenSSL-style ``1.0.1f``.
Comparison pads missing segments with zeros, so ``1.2 == 1.2.0``, and an
absent suffix sorts before any suffix.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from enum import Enum

VERSION_TOKEN = r"\d+(?:\.\d+)*(?:[a-z][a-z0-9]*)?"
_VERSION_RE = re.compile(r"(\d+(?:\.\d+)*)([a-z][a-z0-9]*)?")


@functools.total_ordering
class Version:
    __slots__ = ("segments", "suffix")

    def __init__(self, segments, suffix: str | None = None):
        segments = tuple(int(s) for s in segments)
        if not segments:
            raise ValueError("a version needs at least one numeric segment")
        if any(s < 0 for s in segments):
            raise ValueError("version segments must be non-negative")
        if suffix is not None and not re.fullmatch(r"[a-z][a-z0-9]*", suffix):
            raise ValueError(f"invalid version suffix {suffix!r}")
        self.segments = segments
        self.suffix = suffix

    @classmethod
    def parse(cls, text: str) -> "Version":
        """Parse ``1.0.2k``-style text; a leading ``v`` is tolerated."""
        text = text.strip().lower()
        if text.startswith("v"):
            text = text[1:]
        m = _VERSION_RE.fullmatch(text)
        if m is None:
            raise ValueError(f"not a version: {text!r}")
        return cls((int(s) for s in m.group(1).split(".")), m.group(2))

    def render(self) -> str:
        return ".".join(str(s) for s in self.segments) + (self.suffix or "")

    def _key(self):
        segs = list(self.segments)
        while len(segs) > 1 and segs[-1] == 0:
            segs.pop()
        return tuple(segs), self.suffix or ""

    def __eq__(self, other):
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"Version({self.render()!r})"


def compare_versions(a: Version, b: Version) -> int:
    """Return -1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    ka, kb = a._key(), b._key()
    return (ka > kb) - (ka < kb)


class Relation(str, Enum):
    AT_MOST = "at_most"
    EXACTLY = "exactly"
    AT_LEAST = "at_least"


@dataclass(frozen=True)
class VersionConstraint:
    """One admissible-version rule of a CVE entry.

    ``before`` marks an ``at_most`` bound that came from "before"-type
    wording (or an exclusive upper bound in structured feed data); it only
    matters when the caller asks for strict handling of such bounds.
    """

    relation: Relation
    version: Version
    before: bool = False

    def admits(self, version: Version, strict_before: bool = False) -> bool:
        c = compare_versions(version, self.version)
        if self.relation is Relation.EXACTLY:
            return c == 0
        if self.relation is Relation.AT_LEAST:
            return c >= 0
        if strict_before and self.before:
            return c < 0
        return c <= 0

    def to_dict(self) -> dict:
        d = {"relation": self.relation.value, "version": self.version.render()}
        if self.before:
            d["before"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VersionConstraint":
        return cls(Relation(d["relation"]), Version.parse(d["version"]), bool(d.get("before", False)))

    def __str__(self):
        return f"{self.relation.value} {self.version}"


def admits_any(constraints, version: Version, strict_before: bool = False) -> bool:
    """OR semantics; an empty constraint list admits every version."""
    if not constraints:
        return True
    return any(c.admits(version, strict_before) for c in constraints)

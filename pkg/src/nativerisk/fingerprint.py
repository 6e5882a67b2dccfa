"""Whitelist association of ELF files with known products.

A signature file lists, per product, wildcard patterns over the printable
strings and the defined function names of a library, plus version patterns
carrying a ``{version}`` placeholder. The only wildcard is ``*``; every
other character is literal and a pattern must match the whole text.

Format::

    # comment
    [OpenSSL]
    aliases: openssl
    cpe: openssl:openssl
    strings:
      - OpenSSL *
    functions:
      - SSL_CTX_*
    version:
      - OpenSSL {version} *

Function patterns also match when the name is wrapped in underscores, so
``*_cv_*`` accepts ``cv_resize_impl`` as well as ``icv_cv_resize``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import DuplicateProduct, EmptySignature, SignatureParseError
from .versions import Version

VERSION_PLACEHOLDER = "{version}"
_CAPTURE = r"(\d+(?:\.\d+)+(?:[a-z][a-z0-9]*)?)"

_LIST_KEYS = {"aliases", "cpe", "strings", "functions", "version"}


@lru_cache(maxsize=4096)
def _compile(pattern: str) -> re.Pattern:
    parts = []
    for chunk in re.split(r"(\*|\{version\})", pattern):
        if chunk == "*":
            parts.append(".*?")
        elif chunk == VERSION_PLACEHOLDER:
            parts.append(_CAPTURE)
        elif chunk:
            parts.append(re.escape(chunk))
    return re.compile("".join(parts), re.DOTALL)


def match_string(pattern: str, text: str) -> bool:
    return _compile(pattern).fullmatch(text) is not None


def match_function(pattern: str, name: str) -> bool:
    rx = _compile(pattern)
    return rx.fullmatch(name) is not None or rx.fullmatch(f"_{name}_") is not None


@dataclass(frozen=True)
class ProductSignature:
    product: str
    string_patterns: tuple[str, ...] = ()
    function_patterns: tuple[str, ...] = ()
    version_patterns: tuple[str, ...] = ()
    aliases: tuple[str, ...] = ()
    cpe: tuple[str, ...] = ()

    @property
    def names(self) -> tuple[str, ...]:
        """Product name followed by its aliases, used to spot it in prose."""
        seen = dict.fromkeys((self.product, *self.aliases))
        return tuple(seen)


class SignatureSet:
    """Immutable, ordered collection of product signatures."""

    def __init__(self, signatures=()):
        self._sigs: dict[str, ProductSignature] = {}
        for sig in signatures:
            if sig.product in self._sigs:
                raise DuplicateProduct(sig.product)
            if not sig.string_patterns and not sig.function_patterns:
                raise EmptySignature(sig.product)
            self._sigs[sig.product] = sig

    def __iter__(self):
        return iter(self._sigs.values())

    def __len__(self):
        return len(self._sigs)

    def __contains__(self, product):
        return product in self._sigs

    def __getitem__(self, product) -> ProductSignature:
        return self._sigs[product]

    @property
    def products(self) -> list[str]:
        return list(self._sigs)

    def aliases(self) -> dict[str, tuple[str, ...]]:
        return {p: s.names for p, s in self._sigs.items()}

    def by_cpe(self) -> dict[str, list[str]]:
        """Map ``vendor:product`` CPE keys to tracked product names."""
        out: dict[str, list[str]] = {}
        for sig in self:
            for key in sig.cpe:
                out.setdefault(key.lower(), []).append(sig.product)
        return out


def parse_signatures(text: str) -> SignatureSet:
    blocks: list[dict] = []
    current = None
    key = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise SignatureParseError(f"bad product header {line!r}", lineno)
            current = {"product": line[1:-1].strip(), "line": lineno}
            current.update({k: [] for k in _LIST_KEYS})
            blocks.append(current)
            key = None
            continue
        if current is None:
            raise SignatureParseError("entry outside a product block", lineno)
        if line.startswith("- "):
            if key is None:
                raise SignatureParseError("list item without a key", lineno)
            _add_item(current, key, line[2:].strip(), lineno)
            continue
        name, sep, value = line.partition(":")
        name = name.strip()
        if not sep or name not in _LIST_KEYS:
            raise SignatureParseError(f"unknown key {name!r}", lineno)
        key = name
        if value.strip():
            _add_item(current, key, value.strip(), lineno)

    sigs = []
    seen = set()
    for b in blocks:
        if b["product"] in seen:
            raise DuplicateProduct(f"{b['product']} (line {b['line']})")
        seen.add(b["product"])
        sigs.append(ProductSignature(
            product=b["product"],
            string_patterns=tuple(b["strings"]),
            function_patterns=tuple(b["functions"]),
            version_patterns=tuple(b["version"]),
            aliases=tuple(b["aliases"]),
            cpe=tuple(b["cpe"]),
        ))
    return SignatureSet(sigs)


def _add_item(block: dict, key: str, item: str, lineno: int) -> None:
    if not item:
        raise SignatureParseError("empty pattern", lineno)
    has_placeholder = VERSION_PLACEHOLDER in item
    if key == "version" and item.count(VERSION_PLACEHOLDER) != 1:
        raise SignatureParseError("version pattern needs exactly one {version}", lineno)
    if key != "version" and has_placeholder:
        raise SignatureParseError("{version} is only allowed in version patterns", lineno)
    block[key].append(item)


def load_signatures(path=None) -> SignatureSet:
    """Load a signature file; with no path, the shipped default set."""
    if path is None:
        text = resources.files("nativerisk").joinpath("data/signatures.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_signatures(text)


@dataclass(frozen=True)
class ProductMatch:
    product: str
    version: Version | None
    evidence: tuple[tuple[str, str], ...]
    via: str  # "strings", "functions" or "both"

    def to_dict(self) -> dict:
        return {
            "product": self.product,
            "version": self.version.render() if self.version else None,
            "via": self.via,
            "evidence": [list(e) for e in self.evidence],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProductMatch":
        v = d.get("version")
        return cls(d["product"], Version.parse(v) if v else None,
                   tuple(tuple(e) for e in d["evidence"]), d["via"])


def extract_version(strings, sig: ProductSignature) -> Version | None:
    """First capture wins: patterns are tried in order, each over all strings."""
    for pattern in sig.version_patterns:
        rx = _compile(pattern)
        for s in strings:
            m = rx.fullmatch(s)
            if m:
                return Version.parse(m.group(1))
    return None


def _first_hits(patterns, texts, matcher):
    hits = []
    for pattern in patterns:
        for t in texts:
            if matcher(pattern, t):
                hits.append((pattern, t))
                break
    return hits


def match_products(strings, functions, sigs: SignatureSet) -> list[ProductMatch]:
    """One match per product with at least one pattern hit, in signature order.

    Evidence keeps the first text hit by each pattern. All matching products
    are kept, since a library often embeds others statically.
    """
    strings = list(strings)
    functions = list(functions)
    out = []
    for sig in sigs:
        s_hits = _first_hits(sig.string_patterns, strings, match_string)
        f_hits = _first_hits(sig.function_patterns, functions, match_function)
        if not s_hits and not f_hits:
            continue
        via = "both" if s_hits and f_hits else ("strings" if s_hits else "functions")
        out.append(ProductMatch(sig.product, extract_version(strings, sig),
                                tuple(s_hits + f_hits), via))
    return out

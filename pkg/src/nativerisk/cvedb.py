"""Local CVE database for the tracked products.

Records come from NVD JSON feeds (legacy 1.1 ``CVE_Items`` files or API 2.0
``vulnerabilities`` dumps, optionally gzipped) or from a simplified JSONL
mirror with one object per line::

    {"cve_id": "CVE-2019-7317", "description": "...", "published": "2019-02-04",
     "exploitability": 1.8, "impact": 3.6,
     "products": [{"product": "Libpng",
                   "constraints": [{"relation": "at_most", "version": "1.6.37",
                                    "before": true}]}]}

Descriptions are mined for the affected versions and vulnerable function
names. The on-disk database is JSON lines: a header object followed by
one entry per line, sorted, so identical input gives identical bytes.
"""

from __future__ import annotations

import datetime as dt
import gzip
import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SkippedRecord, UnknownProduct, UnrecognizedFeedFormat
from .versions import Relation, Version, VersionConstraint, admits_any

log = logging.getLogger(__name__)

DB_FORMAT = "nativerisk-cvedb"
DB_FORMAT_VERSION = 1

CVE_ID_RE = re.compile(r"CVE-\d{4}-\d{4,}")

# Description mining vocabulary. The window is counted in whitespace tokens.
WINDOW = 5
BEFORE_PREFIX = {"before", "prior", "earlier", "until", "below", "fixed"}
INCLUSIVE_PREFIX = {"through", "thru", "including"}
AFTER_PREFIX = {"after", "following", "successive", "since", "introduced"}
BEFORE_POSTFIX = {"before", "prior", "earlier", "older", "below", "lower"}
AFTER_POSTFIX = {"after", "following", "successive", "later", "newer", "above",
                 "higher", "onward", "onwards"}
RANGE_CONNECTORS = {"before", "prior", "through", "thru", "to", "until"}
# words allowed between the two versions of an "X before Y" range
RANGE_FILLER = RANGE_CONNECTORS | {"and", "including", "version", "versions"}
# a version right after one of these belongs to a protocol or platform
FOREIGN_QUALIFIERS = {"tls", "ssl", "sslv", "dtls", "http", "protocol", "android", "cvss"}
# Words skipped when looking back from a version for the name that owns it,
# and function words that never name a product.
SUBJECT_FILLER = (BEFORE_PREFIX | INCLUSIVE_PREFIX | AFTER_PREFIX | RANGE_CONNECTORS
                  | BEFORE_POSTFIX | AFTER_POSTFIX
                  | {"and", "or", "from", "in", "version", "versions", "release", "releases"})
NOT_A_NAME = {"a", "an", "the", "of", "on", "for", "with", "by", "as", "at", "is", "are", "was",
              "were", "be", "been", "has", "have", "had", "affects", "affected", "affecting",
              "all", "any", "its", "this", "that", "these", "issue", "vulnerable", "up",
              "builds", "build", "branch", "series", "not", "also", "only"}

_VERSION_WORD = re.compile(r"v?(\d+(?:\.\d+)+(?:[a-z][a-z0-9]*)?)")
_PLACEHOLDER_WORD = re.compile(r"v?\d+(?:\.\d+)*\.x")
_STRIP = ".,;:!?\"'[]{}<>()"
_IDENT = re.compile(r"~?[A-Za-z_][A-Za-z0-9_]*(?:::~?[A-Za-z_][A-Za-z0-9_]*)*")
_CAMEL = re.compile(r"[a-z][a-z0-9]*(?:[A-Z]+[a-z0-9]+)+[A-Z]*")


@dataclass(frozen=True)
class ListedProduct:
    """A product named in a feed's structured data.

    ``key`` is either a CPE ``vendor:product`` pair or a product name.
    ``constraints`` is None when no usable version data was present.
    """

    key: str
    constraints: tuple[VersionConstraint, ...] | None


@dataclass(frozen=True)
class CveRaw:
    cve_id: str
    description: str
    published: dt.date
    exploitability: float | None
    impact: float | None
    listed_products: tuple[ListedProduct, ...] | None = None
    cvss_version: str | None = None

    @property
    def scored(self) -> bool:
        return self.exploitability is not None and self.impact is not None


@dataclass(frozen=True)
class CveEntry:
    cve_id: str
    product: str
    constraints: tuple[VersionConstraint, ...]
    functions: tuple[str, ...]
    published: dt.date
    exploitability: float | None
    impact: float | None
    constraint_source: str = "description"
    review: bool = False
    cvss_version: str | None = None

    @property
    def scored(self) -> bool:
        return self.exploitability is not None and self.impact is not None

    def to_dict(self) -> dict:
        return {
            "cve_id": self.cve_id,
            "product": self.product,
            "constraints": [c.to_dict() for c in self.constraints],
            "functions": list(self.functions),
            "published": self.published.isoformat(),
            "exploitability": self.exploitability,
            "impact": self.impact,
            "constraint_source": self.constraint_source,
            "review": self.review,
            "cvss_version": self.cvss_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CveEntry":
        return cls(
            cve_id=d["cve_id"],
            product=d["product"],
            constraints=tuple(VersionConstraint.from_dict(c) for c in d["constraints"]),
            functions=tuple(d["functions"]),
            published=dt.date.fromisoformat(d["published"]),
            exploitability=d["exploitability"],
            impact=d["impact"],
            constraint_source=d.get("constraint_source", "description"),
            review=d.get("review", False),
            cvss_version=d.get("cvss_version"),
        )


@dataclass
class CveDatabase:
    entries: list[CveEntry]
    built_at: str
    products: list[str]
    product_index: dict[str, list[int]] = field(init=False)

    def __post_init__(self):
        self.product_index = build_index(self.entries, self.products)

    def __eq__(self, other):
        if not isinstance(other, CveDatabase):
            return NotImplemented
        return (self.entries, self.built_at, self.products) == (
            other.entries, other.built_at, other.products)


def build_index(entries, products) -> dict[str, list[int]]:
    index: dict[str, list[int]] = {p: [] for p in products}
    for i, e in enumerate(entries):
        index.setdefault(e.product, []).append(i)
    return index


# ---------------------------------------------------------------------------
# feed ingestion
# ---------------------------------------------------------------------------

def _read_text(path: Path) -> str:
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw.decode("utf-8")


def _parse_date(value) -> dt.date:
    return dt.date.fromisoformat(str(value)[:10])


def _score(value):
    if value is None:
        return None
    value = float(value)
    if not 0.0 <= value <= 10.0:
        raise ValueError(f"CVSS subscore {value} outside [0, 10]")
    return value


def _parse_constraint_version(text):
    try:
        return Version.parse(str(text))
    except ValueError:
        return None


def _cpe_constraints(match: dict):
    """Constraints from one NVD CPE match, or None if unusable.

    A start bound paired with an end bound is dropped: constraints are OR-ed,
    so only the upper bound can be kept.
    """
    uri = match.get("criteria") or match.get("cpe23Uri") or ""
    parts = uri.split(":")
    if len(parts) < 6:
        return None, None
    key = f"{parts[3]}:{parts[4]}".lower()
    end_ex = match.get("versionEndExcluding")
    end_in = match.get("versionEndIncluding")
    start = match.get("versionStartIncluding") or match.get("versionStartExcluding")
    if end_ex or end_in:
        v = _parse_constraint_version(end_ex or end_in)
        if v is None:
            return key, None
        return key, [VersionConstraint(Relation.AT_MOST, v, before=bool(end_ex))]
    if start:
        v = _parse_constraint_version(start)
        return key, None if v is None else [VersionConstraint(Relation.AT_LEAST, v)]
    if parts[5] in ("*", "-", ""):
        return key, []
    v = _parse_constraint_version(parts[5] + (parts[6] if len(parts) > 6 and parts[6] not in ("*", "-") else ""))
    if v is None:
        v = _parse_constraint_version(parts[5])
    return key, None if v is None else [VersionConstraint(Relation.EXACTLY, v)]


def _walk_cpe_matches(nodes):
    for node in nodes or ():
        yield from node.get("cpeMatch", ()) or ()
        yield from node.get("cpe_match", ()) or ()
        yield from _walk_cpe_matches(node.get("children"))


def _listed_from_matches(matches) -> tuple[ListedProduct, ...] | None:
    # per CPE key: "all" (unbounded), "bad" (unparseable) or a constraint list
    state: dict[str, object] = {}
    for m in matches:
        if not m.get("vulnerable", True):
            continue
        key, cons = _cpe_constraints(m)
        if key is None:
            continue
        prev = state.get(key, [])
        if prev == "all":
            continue
        if cons == []:
            state[key] = "all"
        elif cons is None or prev == "bad":
            state[key] = "bad"
        else:
            state[key] = prev + cons
    if not state:
        return None
    out = []
    for key, cons in state.items():
        if cons == "all":
            out.append(ListedProduct(key, ()))
        elif cons == "bad":
            out.append(ListedProduct(key, None))
        else:
            out.append(ListedProduct(key, tuple(dict.fromkeys(cons))))
    return tuple(out)


def _pick_metric(metrics: list):
    if not metrics:
        return None
    primary = [m for m in metrics if m.get("type") == "Primary"]
    return (primary or metrics)[0]


def _from_api2(item: dict, include_v2: bool) -> CveRaw:
    cve = item["cve"]
    desc = next((d["value"] for d in cve.get("descriptions", []) if d.get("lang") == "en"), "")
    metrics = cve.get("metrics", {})
    expl = imp = version = None
    for key, label in (("cvssMetricV31", "3.1"), ("cvssMetricV30", "3.0")):
        m = _pick_metric(metrics.get(key))
        if m:
            expl, imp, version = m.get("exploitabilityScore"), m.get("impactScore"), label
            break
    if version is None and include_v2:
        m = _pick_metric(metrics.get("cvssMetricV2"))
        if m:
            expl, imp, version = m.get("exploitabilityScore"), m.get("impactScore"), "2.0"
    matches = [m for conf in cve.get("configurations", []) or []
               for m in _walk_cpe_matches(conf.get("nodes"))]
    return CveRaw(cve["id"], desc, _parse_date(cve["published"]), _score(expl), _score(imp),
                  _listed_from_matches(matches), version)


def _from_legacy(item: dict, include_v2: bool) -> CveRaw:
    cve = item["cve"]
    desc = next((d["value"] for d in cve["description"]["description_data"]
                 if d.get("lang") == "en"), "")
    impact = item.get("impact", {})
    expl = imp = version = None
    v3 = impact.get("baseMetricV3")
    if v3:
        expl, imp = v3.get("exploitabilityScore"), v3.get("impactScore")
        version = v3.get("cvssV3", {}).get("version", "3.1")
    elif include_v2 and impact.get("baseMetricV2"):
        v2 = impact["baseMetricV2"]
        expl, imp, version = v2.get("exploitabilityScore"), v2.get("impactScore"), "2.0"
    matches = list(_walk_cpe_matches(item.get("configurations", {}).get("nodes")))
    return CveRaw(cve["CVE_data_meta"]["ID"], desc, _parse_date(item["publishedDate"]),
                  _score(expl), _score(imp), _listed_from_matches(matches), version)


def _from_mirror(obj: dict, include_v2: bool) -> CveRaw:
    listed = None
    if obj.get("products") is not None:
        listed = tuple(
            ListedProduct(p["product"], tuple(VersionConstraint.from_dict(c)
                                              for c in p.get("constraints", [])))
            for p in obj["products"]
        )
    return CveRaw(obj["cve_id"], obj["description"], _parse_date(obj["published"]),
                  _score(obj.get("exploitability")), _score(obj.get("impact")),
                  listed, obj.get("cvss_version", "3.1"))


def _check(raw: CveRaw) -> CveRaw:
    if not CVE_ID_RE.fullmatch(raw.cve_id):
        raise ValueError(f"malformed CVE id {raw.cve_id!r}")
    if not isinstance(raw.description, str):
        raise ValueError("description is not text")
    return raw


def ingest_feed(path, include_v2: bool = False, skipped: list | None = None) -> list[CveRaw]:
    """Read one feed file into CveRaw records.

    Malformed records are logged, appended to ``skipped`` when given, and
    left out. Records without CVSS v3 subscores are kept with the scores set
    to None unless ``include_v2`` supplies v2 ones.
    """
    path = Path(path)
    try:
        text = _read_text(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise UnrecognizedFeedFormat(f"{path}: {exc}") from exc

    items: list
    convert = None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "CVE_Items" in doc:
        items, convert = doc["CVE_Items"], _from_legacy
    elif isinstance(doc, dict) and "vulnerabilities" in doc:
        items, convert = doc["vulnerabilities"], _from_api2
    elif isinstance(doc, dict) and "cve_id" in doc:
        items, convert = [doc], _from_mirror
    elif doc is None and text.strip():
        items, convert = [], _from_mirror
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                if not items and lineno == 1:
                    raise UnrecognizedFeedFormat(f"{path}: not JSON or JSON lines")
                _skip(skipped, path, None, f"line {lineno}: invalid JSON")
                continue
            if not items and not (isinstance(obj, dict) and "cve_id" in obj):
                raise UnrecognizedFeedFormat(f"{path}: JSON lines without cve_id")
            items.append(obj)
    else:
        raise UnrecognizedFeedFormat(f"{path}: unrecognized feed layout")

    out = []
    for item in items:
        try:
            out.append(_check(convert(item, include_v2)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            cve_id = _guess_id(item)
            _skip(skipped, path, cve_id, f"{type(exc).__name__}: {exc}")
    for raw in out:
        if not raw.scored:
            log.info("%s has no usable CVSS subscores; it will not be scored", raw.cve_id)
    return out


def _guess_id(item):
    if not isinstance(item, dict):
        return None
    for getter in (lambda i: i["cve_id"], lambda i: i["cve"]["id"],
                   lambda i: i["cve"]["CVE_data_meta"]["ID"]):
        try:
            return str(getter(item))
        except (KeyError, TypeError):
            pass
    return None


def _skip(skipped, source, cve_id, reason):
    rec = SkippedRecord(str(source), cve_id, reason)
    log.warning("skipped record %s from %s: %s", cve_id, source, reason)
    if skipped is not None:
        skipped.append(rec)


# ---------------------------------------------------------------------------
# description mining
# ---------------------------------------------------------------------------

def _alias_pattern(alias: str) -> re.Pattern:
    return re.compile(r"(?<![\w-])" + re.escape(alias) + r"(?![\w-])", re.IGNORECASE)


def detect_product(description: str, products) -> list[str]:
    """Tracked products named in ``description``, whole-word, case-insensitive.

    ``products`` is a list of names, a name -> aliases mapping, or a
    SignatureSet.
    """
    if hasattr(products, "aliases") and callable(products.aliases):
        products = products.aliases()
    if not isinstance(products, dict):
        products = {p: (p,) for p in products}
    hits = []
    for name, aliases in products.items():
        if any(_alias_pattern(a).search(description) for a in (name, *aliases)):
            hits.append(name)
    return hits


def _clean(word: str) -> str:
    return word.strip(_STRIP).lower()


def _is_version_like(word: str) -> bool:
    return bool(_VERSION_WORD.fullmatch(word) or _PLACEHOLDER_WORD.fullmatch(word))


def _ends_sentence(raw: str) -> bool:
    return raw.rstrip(")\"'").endswith((".", ";"))


def extract_version_constraint(description: str,
                               product_names=None) -> list[VersionConstraint]:
    """Version constraints stated in CVE prose.

    Each dotted version token becomes one constraint. A before-type word
    among the preceding tokens gives ``at_most`` (inclusive, as "before
    v.n" is read as "<= v.n"); an after-type word gives ``at_least``;
    "v.n and earlier" / "v.n and later" forms are recognised after the
    token. Otherwise the relation is ``exactly``. In "X before Y" and
    "X through Y" the branch version X is dropped.

    With ``product_names`` (the names one product goes by), versions whose
    owning name is some other product, as in "libwebp in Google Chrome
    prior to 116.0", are left out.
    """
    raw_tokens = description.split()
    words = [_clean(t) for t in raw_tokens]
    names = [n.lower().split() for n in product_names] if product_names else None
    out: list[VersionConstraint] = []
    for i, word in enumerate(words):
        m = _VERSION_WORD.fullmatch(word)
        if not m:
            continue
        if any(w in FOREIGN_QUALIFIERS for w in words[max(0, i - 2):i]):
            continue
        try:
            version = Version.parse(m.group(1))
        except ValueError:
            continue
        if _is_branch_qualifier(words, raw_tokens, i):
            continue
        if names and _owned_by_other(words, raw_tokens, i, names):
            continue
        out.append(_classify_token(words, raw_tokens, i, version))
    return list(dict.fromkeys(out))


def _is_branch_qualifier(words, raw_tokens, i) -> bool:
    seen_connector = False
    for j in range(i + 1, min(len(words), i + 1 + WINDOW)):
        if _ends_sentence(raw_tokens[j - 1]):
            return False
        if _is_version_like(words[j]):
            return seen_connector
        if words[j] not in RANGE_FILLER:
            return False
        if words[j] in RANGE_CONNECTORS:
            seen_connector = True
    return False


def _owned_by_other(words, raw_tokens, i, names) -> bool:
    """True when the name a version hangs off is a word other than ``names``.

    Looks back over range words, other versions and parenthetical asides.
    Unknown owners (sentence start, function words) count as ours.
    """
    depth = 0
    for k in range(i - 1, -1, -1):
        raw = raw_tokens[k]
        if _ends_sentence(raw) and depth == 0:
            return False
        if raw.startswith("(") and raw.rstrip(".,;:").endswith(")") and not depth:
            continue
        if raw.rstrip(".,;:").endswith(")") and not raw.startswith("("):
            depth += 1
        if depth:
            if raw.startswith("("):
                depth -= 1
            continue
        w = words[k]
        if not w or _is_version_like(w) or w in SUBJECT_FILLER:
            continue
        if any(words[k - len(n) + 1:k + 1] == n for n in names):
            return False
        return w not in NOT_A_NAME
    return False


def _classify_token(words, raw_tokens, i, version) -> VersionConstraint:
    for j in range(i - 1, max(-1, i - 1 - WINDOW), -1):
        if _is_version_like(words[j]) or _ends_sentence(raw_tokens[j]):
            break
        w = words[j]
        if w in BEFORE_PREFIX:
            return VersionConstraint(Relation.AT_MOST, version, before=True)
        if w in INCLUSIVE_PREFIX:
            return VersionConstraint(Relation.AT_MOST, version)
        if w in AFTER_PREFIX:
            return VersionConstraint(Relation.AT_LEAST, version)
    if not _ends_sentence(raw_tokens[i]) and i + 1 < len(words) and words[i + 1] in ("and", "or"):
        for j in range(i + 2, min(len(words), i + 1 + WINDOW)):
            w = words[j]
            if _is_version_like(w):
                break
            if w in BEFORE_POSTFIX:
                return VersionConstraint(Relation.AT_MOST, version)
            if w in AFTER_POSTFIX:
                return VersionConstraint(Relation.AT_LEAST, version)
            if _ends_sentence(raw_tokens[j]):
                break
    return VersionConstraint(Relation.EXACTLY, version)


def extract_function_names(description: str) -> list[str]:
    """Identifiers that look like function names.

    Kept: tokens with ``_`` or ``::``, tokens written as calls (``foo()``),
    and lowerCamelCase words of two or more humps such as ``makeSum``.
    File names and dotted paths are not identifiers and are skipped.
    """
    out: dict[str, None] = {}
    for raw in description.split():
        tok = raw.strip(".,;:!?\"'[]{}<>")
        call = False
        while tok.endswith("()"):
            tok, call = tok[:-2], True
        tok = tok.strip("()")
        while tok.endswith("()"):
            tok, call = tok[:-2], True
        if len(tok) < 2 or not _IDENT.fullmatch(tok) or not re.search(r"[A-Za-z]", tok):
            continue
        if call or "_" in tok or "::" in tok or _CAMEL.fullmatch(tok):
            out.setdefault(tok, None)
    return list(out)


# ---------------------------------------------------------------------------
# building, querying, persistence
# ---------------------------------------------------------------------------

def _cve_sort_key(cve_id: str):
    _, year, num = cve_id.split("-", 2)
    return int(year), int(num)


def _default_built_at(raw) -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        stamp = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc)
        return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")
    if not raw:
        return "1970-01-01T00:00:00Z"
    return max(r.published for r in raw).isoformat() + "T00:00:00Z"


def _resolve_listed(raw: CveRaw, sigs) -> dict[str, tuple | None]:
    """Tracked product -> structured constraints (None if unusable)."""
    if not raw.listed_products:
        return {}
    by_cpe = sigs.by_cpe()
    by_name = {p.lower(): p for p in sigs.products}
    out: dict[str, tuple | None] = {}
    for lp in raw.listed_products:
        targets = by_cpe.get(lp.key.lower()) or (
            [by_name[lp.key.lower()]] if lp.key.lower() in by_name else [])
        for product in targets:
            prev = out.get(product)
            if lp.constraints is None:
                out.setdefault(product, None)
            elif prev is None:
                out[product] = lp.constraints
            elif prev == () or lp.constraints == ():
                out[product] = ()
            else:
                out[product] = tuple(dict.fromkeys(prev + lp.constraints))
    return out


def build_database(raw_records, sigs, skipped: list | None = None,
                   built_at: str | None = None) -> CveDatabase:
    """Fan each record out to one entry per tracked product it concerns.

    Structured product/version data from the feed wins over description
    mining for the products it covers. Records with neither CVSS subscore
    are dropped (and logged). Output order is (product, CVE number).
    """
    raw_records = list(raw_records)
    products = sigs.products
    order = {p: i for i, p in enumerate(products)}
    aliases = sigs.aliases()
    entries: dict[tuple[str, str], CveEntry] = {}
    for raw in raw_records:
        if raw.exploitability is None and raw.impact is None:
            _skip(skipped, "build", raw.cve_id, "no CVSS subscores")
            continue
        structured = _resolve_listed(raw, sigs)
        detected = detect_product(raw.description, aliases)
        targets = [p for p in products if p in structured or p in detected]
        if not targets:
            continue
        functions = tuple(extract_function_names(raw.description))
        for product in targets:
            mined = extract_version_constraint(raw.description, aliases.get(product, (product,)))
            cons = structured.get(product)
            if cons is not None:
                source = "structured"
                if product in detected and set(cons) != set(mined):
                    log.info("%s/%s: structured versions override description (%s vs %s)",
                             raw.cve_id, product, [str(c) for c in cons], [str(c) for c in mined])
            else:
                cons, source = tuple(mined), "description"
            relations = {c.relation for c in cons}
            entry = CveEntry(
                cve_id=raw.cve_id,
                product=product,
                constraints=tuple(cons),
                functions=functions,
                published=raw.published,
                exploitability=raw.exploitability,
                impact=raw.impact,
                constraint_source=source,
                review=len(relations) > 1,
                cvss_version=raw.cvss_version,
            )
            key = (product, raw.cve_id)
            if key in entries:
                _skip(skipped, "build", raw.cve_id, f"duplicate record for {product}")
                continue
            entries[key] = entry
    ordered = sorted(entries.values(),
                     key=lambda e: (order.get(e.product, len(order)), _cve_sort_key(e.cve_id)))
    return CveDatabase(ordered, built_at or _default_built_at(raw_records), list(products))


def query(db: CveDatabase, product: str, version: Version | None,
          strict_before: bool = False) -> list[CveEntry]:
    """Entries for ``product`` whose constraints admit ``version``.

    With no version every entry of the product is returned.
    """
    if product not in db.product_index:
        raise UnknownProduct(product)
    entries = [db.entries[i] for i in db.product_index[product]]
    if version is None:
        return entries
    return [e for e in entries if admits_any(e.constraints, version, strict_before)]


def dumps_database(db: CveDatabase) -> str:
    header = {"format": DB_FORMAT, "format_version": DB_FORMAT_VERSION,
              "built_at": db.built_at, "products": db.products,
              "entries": len(db.entries)}
    lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
    lines += [json.dumps(e.to_dict(), sort_keys=True, separators=(",", ":"))
              for e in db.entries]
    return "\n".join(lines) + "\n"


def loads_database(text: str) -> CveDatabase:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty database file")
    header = json.loads(lines[0])
    if header.get("format") != DB_FORMAT:
        raise ValueError("not a nativerisk CVE database")
    entries = [CveEntry.from_dict(json.loads(ln)) for ln in lines[1:]]
    return CveDatabase(entries, header["built_at"], list(header["products"]))


def save_database(db: CveDatabase, path) -> None:
    Path(path).write_text(dumps_database(db), encoding="utf-8")


def load_database(path) -> CveDatabase:
    return loads_database(Path(path).read_text(encoding="utf-8"))

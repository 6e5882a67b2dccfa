"""Per-app reports, the CVE log, and batch statistics."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

from .apk import AppMetadata
from .fingerprint import ProductMatch
from .risk import CveFinding, RiskLevel, app_risk, library_risk

SCHEMA_VERSION = 1
STATS_COLUMNS = ("none", "low", "medium", "high", "critical")
UNKNOWN = "unknown"


@dataclass(frozen=True)
class LibraryFinding:
    library_name: str
    archive_path: str
    products: tuple[ProductMatch, ...] = ()
    findings: tuple[CveFinding, ...] = ()
    library_risk: RiskLevel = RiskLevel.NONE
    stripped: bool = False
    error: str | None = None

    @classmethod
    def build(cls, library_name, archive_path, products, findings, stripped=False):
        products, findings = tuple(products), tuple(findings)
        return cls(library_name, archive_path, products, findings,
                   library_risk(findings, product_matched=bool(products)), stripped)

    def to_dict(self) -> dict:
        return {
            "library_name": self.library_name,
            "archive_path": self.archive_path,
            "stripped": self.stripped,
            "error": self.error,
            "products": [p.to_dict() for p in self.products],
            "findings": [f.to_dict() for f in self.findings],
            "library_risk": self.library_risk.name,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LibraryFinding":
        return cls(
            library_name=d["library_name"],
            archive_path=d["archive_path"],
            products=tuple(ProductMatch.from_dict(p) for p in d["products"]),
            findings=tuple(CveFinding.from_dict(f) for f in d["findings"]),
            library_risk=RiskLevel.parse(d["library_risk"]),
            stripped=d.get("stripped", False),
            error=d.get("error"),
        )


@dataclass(frozen=True)
class AppReport:
    apk_id: str
    metadata: AppMetadata
    libraries: tuple[LibraryFinding, ...]
    app_risk: RiskLevel
    scan_timestamp: str
    abi: str | None = None
    has_native_code: bool = False
    errors: tuple[str, ...] = field(default=())

    @classmethod
    def build(cls, metadata: AppMetadata, libraries, scan_timestamp: str, abi=None,
              has_native_code=False, errors=()):
        libraries = tuple(libraries)
        return cls(metadata.apk_id, metadata, libraries,
                   app_risk(lib.library_risk for lib in libraries),
                   scan_timestamp, abi, has_native_code, tuple(errors))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "apk_id": self.apk_id,
            "metadata": self.metadata.to_dict(),
            "abi": self.abi,
            "has_native_code": self.has_native_code,
            "libraries": [lib.to_dict() for lib in self.libraries],
            "app_risk": self.app_risk.name,
            "scan_timestamp": self.scan_timestamp,
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AppReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(
            apk_id=d["apk_id"],
            metadata=AppMetadata.from_dict(d["metadata"]),
            libraries=tuple(LibraryFinding.from_dict(x) for x in d["libraries"]),
            app_risk=RiskLevel.parse(d["app_risk"]),
            scan_timestamp=d["scan_timestamp"],
            abi=d.get("abi"),
            has_native_code=d.get("has_native_code", False),
            errors=tuple(d.get("errors", ())),
        )


def report_schema() -> dict:
    text = resources.files("nativerisk").joinpath("data/report.schema.json").read_text("utf-8")
    return json.loads(text)


def _canonical(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n").encode("utf-8")


def emit_app_report(report: AppReport) -> bytes:
    """Canonical JSON: sorted keys, fixed layout, identical bytes for identical input."""
    return _canonical(report.to_dict())


def parse_app_report(data) -> AppReport:
    return AppReport.from_dict(json.loads(data))


def _log_value(level) -> str:
    return level.name if level is not None else "UNSCORED"


def emit_cve_log(reports) -> bytes:
    """Tab-separated ``apk_id library cve_id vuln_level risk``, one line per finding."""
    rows = []
    for rep in reports:
        for lib in rep.libraries:
            for f in lib.findings:
                rows.append((rep.apk_id, lib.library_name, f.cve_id,
                             f.vuln_level.name, _log_value(f.risk)))
    rows.sort(key=lambda r: (r[0], r[1], _cve_key(r[2]), r[3], r[4]))
    return "".join("\t".join(r) + "\n" for r in rows).encode("utf-8")


def _cve_key(cve_id: str):
    try:
        _, year, num = cve_id.split("-", 2)
        return int(year), int(num), cve_id
    except ValueError:
        return 0, 0, cve_id


@dataclass
class StatsTable:
    group_key: str
    rows: dict[str, Counter]

    def merge(self, other: "StatsTable") -> "StatsTable":
        if other.group_key != self.group_key:
            raise ValueError("cannot merge tables grouped by different keys")
        rows = {k: Counter(v) for k, v in self.rows.items()}
        for k, v in other.rows.items():
            rows.setdefault(k, Counter()).update(v)
        return StatsTable(self.group_key, rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("key",) + STATS_COLUMNS)
        keys = sorted(self.rows, key=lambda k: (k == UNKNOWN, k))
        for k in keys:
            counts = self.rows[k]
            w.writerow([k] + [counts.get(level.name, 0) for level in RiskLevel])
        return buf.getvalue()


def _group_value(report: AppReport, key: str) -> str:
    if key == "year":
        date = report.metadata.release_date
        return str(date.year) if date else UNKNOWN
    if key == "market":
        return report.metadata.market or UNKNOWN
    raise ValueError(f"unknown grouping key {key!r}")


def aggregate_stats(reports, key: str) -> StatsTable:
    """Count apps per risk level, grouped by release year or market."""
    rows: dict[str, Counter] = {}
    for rep in reports:
        rows.setdefault(_group_value(rep, key), Counter())[rep.app_risk.name] += 1
    return StatsTable(key, rows)

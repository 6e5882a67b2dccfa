"""Vulnerability risk assessment for native libraries shipped in Android apps."""

from .apk import AppMetadata, open_apk, extract_native_libraries, load_metadata, select_abi
from .cvedb import CveDatabase, CveEntry, build_database, ingest_feed, load_database, query
from .elf import ElfArtifact, parse_elf
from .fingerprint import ProductMatch, SignatureSet, load_signatures, match_products
from .report import AppReport, LibraryFinding, StatsTable, aggregate_stats, emit_app_report, emit_cve_log
from .risk import (CveFinding, RiskLevel, SeverityClass, VulnLevel, app_risk,
                   classify_vulnerability_level, library_risk, qualitative_severity,
                   risk_matrix_lookup, score_cve, threat_impact_product)
from .scan import ScanConfig, Scanner, scan_apk
from .versions import Version, VersionConstraint, compare_versions

__version__ = "0.1.0"

__all__ = [
    "AppMetadata", "AppReport", "CveDatabase", "CveEntry", "CveFinding", "ElfArtifact",
    "LibraryFinding", "ProductMatch", "RiskLevel", "ScanConfig", "Scanner", "SeverityClass",
    "SignatureSet", "StatsTable", "Version", "VersionConstraint", "VulnLevel",
    "aggregate_stats", "app_risk", "build_database", "classify_vulnerability_level",
    "compare_versions", "emit_app_report", "emit_cve_log", "extract_native_libraries",
    "ingest_feed", "library_risk", "load_database", "load_metadata", "load_signatures",
    "match_products", "open_apk", "parse_elf", "qualitative_severity", "query",
    "risk_matrix_lookup", "scan_apk", "score_cve", "select_abi", "threat_impact_product",
]

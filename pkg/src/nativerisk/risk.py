"""Qualitative risk scoring of CVEs, libraries and apps.

Risk follows the ISO 27005 product ``threat * impact * vulnerability``:
the CVSS exploitability and impact subscores give a 0-100 threat/impact
score that is bucketed into a severity class, the evidence found in the
library gives a vulnerability level, and a fixed matrix combines the two.
Libraries and apps take the worst risk of their parts.
"""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from enum import IntEnum

from .cvedb import CveEntry
from .errors import MissingReleaseDate, OutOfRange
from .versions import Version, admits_any

log = logging.getLogger(__name__)

MEDIUM_WINDOW_DAYS = 730


class _Level(IntEnum):
    def __str__(self):
        return self.name

    @classmethod
    def parse(cls, name: str):
        return cls[name.upper()]


class VulnLevel(_Level):
    NONE = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3
    CRITICAL = 4


class SeverityClass(_Level):
    LOW = 1
    MEDIUM = 2
    HIGH = 3
    CRITICAL = 4


class RiskLevel(_Level):
    NONE = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3
    CRITICAL = 4


# rows: severity; columns: vulnerability NONE, LOW, MEDIUM, HIGH, CRITICAL
_R = RiskLevel
RISK_MATRIX: dict[SeverityClass, tuple[RiskLevel, ...]] = {
    SeverityClass.CRITICAL: (_R.MEDIUM, _R.HIGH, _R.HIGH, _R.CRITICAL, _R.CRITICAL),
    SeverityClass.HIGH: (_R.MEDIUM, _R.MEDIUM, _R.HIGH, _R.HIGH, _R.CRITICAL),
    SeverityClass.MEDIUM: (_R.LOW, _R.MEDIUM, _R.MEDIUM, _R.HIGH, _R.HIGH),
    SeverityClass.LOW: (_R.LOW, _R.LOW, _R.MEDIUM, _R.MEDIUM, _R.HIGH),
}
del _R


@dataclass(frozen=True)
class RiskInputs:
    threat: float
    impact: float
    vulnerability: VulnLevel


@dataclass(frozen=True)
class LibraryEvidence:
    product: str
    version: Version | None = None
    matched_functions: frozenset[str] = frozenset()
    stripped: bool = False

    @property
    def version_found(self) -> bool:
        return self.version is not None


@dataclass(frozen=True)
class CveFinding:
    cve_id: str
    product: str
    vuln_level: VulnLevel
    severity: SeverityClass | None
    threat_impact: float | None
    risk: RiskLevel | None
    rationale: tuple[str, ...] = field(default=())

    @property
    def scored(self) -> bool:
        return self.risk is not None

    def to_dict(self) -> dict:
        return {
            "cve_id": self.cve_id,
            "product": self.product,
            "vuln_level": self.vuln_level.name,
            "severity": self.severity.name if self.severity else None,
            "threat_impact": self.threat_impact,
            "risk": self.risk.name if self.risk else None,
            "status": "SCORED" if self.scored else "UNSCORED",
            "rationale": list(self.rationale),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CveFinding":
        return cls(
            cve_id=d["cve_id"],
            product=d["product"],
            vuln_level=VulnLevel.parse(d["vuln_level"]),
            severity=SeverityClass.parse(d["severity"]) if d.get("severity") else None,
            threat_impact=d.get("threat_impact"),
            risk=RiskLevel.parse(d["risk"]) if d.get("risk") else None,
            rationale=tuple(d.get("rationale", ())),
        )


def _classify(ev: LibraryEvidence, entry: CveEntry, release_date, strict_before: bool):
    confirmed = sorted(set(entry.functions) & set(ev.matched_functions))
    if ev.version_found:
        if admits_any(entry.constraints, ev.version, strict_before):
            if confirmed:
                return VulnLevel.CRITICAL, (
                    f"version {ev.version} is affected and vulnerable function "
                    f"{', '.join(confirmed)} is present (reachability not checked)")
            why = ("binary is stripped" if ev.stripped else
                   "entry names no function" if not entry.functions else
                   "vulnerable function not found")
            return VulnLevel.HIGH, f"version {ev.version} is affected; {why}"
        return VulnLevel.LOW, f"version {ev.version} is not affected"
    if not confirmed:
        return VulnLevel.LOW, "no version found and no vulnerable function present"
    if release_date is None:
        raise MissingReleaseDate(entry.cve_id)
    gap = abs((release_date - entry.published).days)
    if gap < MEDIUM_WINDOW_DAYS:
        return VulnLevel.MEDIUM, (
            f"no version found; function {', '.join(confirmed)} present; "
            f"release and CVE publication {gap} days apart")
    return VulnLevel.LOW, (
        f"no version found; function present but release and CVE publication "
        f"{gap} days apart")


def classify_vulnerability_level(ev: LibraryEvidence, entry: CveEntry, meta=None,
                                 strict_before: bool = False) -> VulnLevel:
    """Evidence level for one CVE against one library.

    CRITICAL: affected version and a vulnerable function symbol present.
    HIGH: affected version, function not confirmed.
    MEDIUM: no version, function present, app released within two years of
    the CVE. LOW otherwise. Raises MissingReleaseDate when the MEDIUM test
    needs a release date that ``meta`` lacks.
    """
    if ev.product != entry.product:
        raise ValueError(f"evidence for {ev.product} scored against {entry.product} entry")
    release = getattr(meta, "release_date", None)
    return _classify(ev, entry, release, strict_before)[0]


def threat_impact_product(threat: float, impact: float) -> float:
    """Exact decimal product of the two subscores, in [0, 100]."""
    for name, value in (("threat", threat), ("impact", impact)):
        if value is None or not 0 <= value <= 10:
            raise OutOfRange(f"{name} {value!r} outside [0, 10]")
    return float(Decimal(str(threat)) * Decimal(str(impact)))


def qualitative_severity(score: float) -> SeverityClass:
    """[90, 100] CRITICAL, [70, 90) HIGH, [40, 70) MEDIUM, [0, 40) LOW."""
    if score is None or not 0 <= score <= 100:
        raise OutOfRange(f"score {score!r} outside [0, 100]")
    if score >= 90:
        return SeverityClass.CRITICAL
    if score >= 70:
        return SeverityClass.HIGH
    if score >= 40:
        return SeverityClass.MEDIUM
    return SeverityClass.LOW


def risk_matrix_lookup(sev: SeverityClass, vuln: VulnLevel) -> RiskLevel:
    return RISK_MATRIX[SeverityClass(sev)][VulnLevel(vuln)]


def score_cve(ev: LibraryEvidence, entry: CveEntry, meta=None,
              strict_before: bool = False) -> CveFinding:
    """Classify, combine subscores, and look up the risk for one CVE.

    A missing release date on the MEDIUM path downgrades to LOW with a
    warning. Entries without both subscores yield an unscored finding.
    """
    release = getattr(meta, "release_date", None)
    trail = []
    try:
        vuln, why = _classify(ev, entry, release, strict_before)
    except MissingReleaseDate:
        log.warning("%s: release date unknown, MEDIUM evidence downgraded to LOW", entry.cve_id)
        vuln, why = VulnLevel.LOW, "function present but release date unknown; downgraded"
    trail.append(f"vulnerability {vuln.name}: {why}")
    if not entry.scored:
        trail.append("CVSS subscores missing: unscored")
        return CveFinding(entry.cve_id, entry.product, vuln, None, None, None, tuple(trail))
    ti = threat_impact_product(entry.exploitability, entry.impact)
    trail.append(f"threat*impact = {entry.exploitability} * {entry.impact} = {ti:g}")
    sev = qualitative_severity(ti)
    trail.append(f"severity {sev.name} for score {ti:g}")
    risk = risk_matrix_lookup(sev, vuln)
    trail.append(f"matrix[{sev.name}][{vuln.name}] = {risk.name}")
    return CveFinding(entry.cve_id, entry.product, vuln, sev, ti, risk, tuple(trail))


def library_risk(findings, product_matched: bool = True) -> RiskLevel:
    """Worst scored finding; LOW for a matched product with none, NONE if unmatched."""
    if not product_matched:
        return RiskLevel.NONE
    risks = [f.risk for f in findings if f.risk is not None]
    return max(risks, default=RiskLevel.LOW)


def app_risk(library_risks) -> RiskLevel:
    return max((RiskLevel(r) for r in library_risks), default=RiskLevel.NONE)

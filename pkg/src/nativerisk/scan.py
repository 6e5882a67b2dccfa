"""The per-APK workflow: extract, fingerprint, look up, score."""

from __future__ import annotations

import datetime as dt
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .apk import (ABI_PREFERENCE, AppMetadata, NativeLibraryBlob, Sidecar, available_abis,
                  extract_native_libraries, load_metadata, open_apk, select_abi)
from .cvedb import CveDatabase, load_database, query
from .elf import parse_elf
from .errors import MalformedElf, NativeRiskError, NotAnElf, UnknownProduct
from .fingerprint import SignatureSet, load_signatures, match_products
from .report import AppReport, LibraryFinding
from .risk import LibraryEvidence, score_cve

log = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def default_scan_time() -> dt.datetime:
    """SOURCE_DATE_EPOCH when set, so reruns can reproduce byte-identical reports."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc)
    return dt.datetime.now(dt.timezone.utc).replace(microsecond=0)


@dataclass(frozen=True)
class ScanConfig:
    signature_path: Path | None = None
    database_path: Path | None = None
    abi_override: tuple[str, ...] | None = None
    min_string_len: int = 4
    strict_before: bool = False
    output_dir: Path | None = None
    scan_time: dt.datetime | None = None
    use_zip_dates: bool = True

    def validate(self) -> None:
        """Fail before any work starts if a referenced input is missing."""
        for name in ("signature_path", "database_path"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"{name}: {path} does not exist")
        if self.min_string_len < 1:
            raise ValueError("min_string_len must be positive")

    @property
    def abi_preference(self) -> tuple[str, ...]:
        return tuple(self.abi_override) if self.abi_override else ABI_PREFERENCE

    def timestamp(self) -> dt.datetime:
        return self.scan_time or default_scan_time()


class Scanner:
    """Scans APKs against one signature set and one CVE database."""

    def __init__(self, db: CveDatabase, sigs: SignatureSet, config: ScanConfig | None = None):
        self.db = db
        self.sigs = sigs
        self.config = config or ScanConfig()

    @classmethod
    def from_config(cls, config: ScanConfig) -> "Scanner":
        config.validate()
        if config.database_path is None:
            raise ValueError("a CVE database is required to scan")
        return cls(load_database(config.database_path),
                   load_signatures(config.signature_path), config)

    def analyze_library(self, blob: NativeLibraryBlob, meta: AppMetadata) -> LibraryFinding:
        try:
            art = parse_elf(blob.data, self.config.min_string_len)
        except (NotAnElf, MalformedElf) as exc:
            log.warning("%s: %s", blob.archive_path, exc)
            return LibraryFinding(blob.name, blob.archive_path,
                                  error=f"{type(exc).__name__}: {exc}")
        matches = match_products(art.strings, art.functions, self.sigs)
        present = frozenset(art.functions)
        findings = []
        for m in matches:
            try:
                entries = query(self.db, m.product, m.version, self.config.strict_before)
            except UnknownProduct:
                log.warning("%s: product %s not in database", blob.archive_path, m.product)
                continue
            wanted = {f for e in entries for f in e.functions}
            ev = LibraryEvidence(m.product, m.version, present & wanted, art.stripped)
            findings += [score_cve(ev, e, meta, self.config.strict_before) for e in entries]
        return LibraryFinding.build(blob.name, blob.archive_path, matches, findings, art.stripped)

    def scan(self, path, sidecar: Sidecar | None = None) -> AppReport:
        """Raises NotAnArchive or IoFailure when the APK cannot be opened."""
        when = self.config.timestamp()
        apk = open_apk(path)
        meta = load_metadata(apk, sidecar, self.config.use_zip_dates, when.date())
        abis = available_abis(apk)
        abi = select_abi(abis, self.config.abi_preference)
        problems: list = []
        libraries = []
        if abi is not None:
            for blob in extract_native_libraries(apk, abi, problems):
                libraries.append(self.analyze_library(blob, meta))
        elif abis:
            log.info("%s: no preferred ABI among %s", path, sorted(abis))
        errors = [f"corrupt entry {p.archive_path}: {p.reason}" for p in problems]
        return AppReport.build(meta, libraries, when.strftime(TIMESTAMP_FORMAT), abi,
                               has_native_code=bool(abis), errors=errors)


def scan_apk(path, db: CveDatabase, sigs: SignatureSet, config: ScanConfig | None = None,
             sidecar: Sidecar | None = None) -> AppReport:
    return Scanner(db, sigs, config).scan(path, sidecar)


# Batch scanning: each worker process builds its Scanner once.
_worker: dict = {}


def _init_worker(db, sigs, config, sidecar):
    _worker["scanner"] = Scanner(db, sigs, config)
    _worker["sidecar"] = sidecar


def _scan_one(path):
    try:
        return str(path), _worker["scanner"].scan(path, _worker["sidecar"]), None
    except (NativeRiskError, OSError) as exc:
        return str(path), None, f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # isolate one bad APK from the rest of the batch
        log.exception("unexpected failure on %s", path)
        return str(path), None, f"{type(exc).__name__}: {exc}"


def scan_many(paths, db: CveDatabase, sigs: SignatureSet, config: ScanConfig,
              sidecar: Sidecar | None = None, jobs: int | None = None):
    """Scan every path; returns (path, report or None, error or None) sorted by path.

    The scan time is fixed once up front so all reports in a batch share it.
    """
    paths = sorted(str(p) for p in paths)
    if config.scan_time is None:
        config = replace(config, scan_time=config.timestamp())
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(paths) <= 1:
        _init_worker(db, sigs, config, sidecar)
        results = [_scan_one(p) for p in paths]
    else:
        with ProcessPoolExecutor(jobs, initializer=_init_worker,
                                 initargs=(db, sigs, config, sidecar)) as pool:
            results = list(pool.map(_scan_one, paths))
    return sorted(results, key=lambda r: r[0])


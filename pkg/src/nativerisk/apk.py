"""Reading native libraries and app metadata out of APK archives."""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import logging
import zipfile
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorruptEntry, IoFailure, MalformedSidecarRow, NotAnArchive

log = logging.getLogger(__name__)

ABI_PREFERENCE = ("armeabi-v7a", "arm64-v8a", "x86_64")

# ZIP writers without real timestamps store 1980-01-01 (or 1981 for some
# Android build tools); such dates say nothing about the release.
_PLACEHOLDER_BEFORE = dt.date(1981, 1, 2)


@dataclass(frozen=True)
class ApkPackage:
    path: Path
    entries: tuple[tuple[str, int], ...]
    sha256: str
    newest_entry_date: dt.date | None = None

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.entries]


@dataclass(frozen=True)
class AppMetadata:
    apk_id: str
    release_date: dt.date | None = None
    market: str | None = None
    release_date_source: str | None = None  # "sidecar" or "zip-mtime" (low confidence)

    def to_dict(self) -> dict:
        return {
            "apk_id": self.apk_id,
            "release_date": self.release_date.isoformat() if self.release_date else None,
            "release_date_source": self.release_date_source,
            "market": self.market,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AppMetadata":
        rd = d.get("release_date")
        return cls(d["apk_id"], dt.date.fromisoformat(rd) if rd else None,
                   d.get("market"), d.get("release_date_source"))


@dataclass(frozen=True)
class NativeLibraryBlob:
    archive_path: str
    abi: str
    data: bytes = field(repr=False)

    @property
    def name(self) -> str:
        return self.archive_path.rsplit("/", 1)[-1]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def open_apk(path) -> ApkPackage:
    """List the archive and hash the file; entries are not decompressed."""
    path = Path(path)
    try:
        digest = _sha256(path)
        with zipfile.ZipFile(path) as zf:
            infos = zf.infolist()
    except zipfile.BadZipFile as exc:
        raise NotAnArchive(f"{path}: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    if not infos:
        raise NotAnArchive(f"{path}: archive has no entries")
    dates = [dt.date(*i.date_time[:3]) for i in infos]
    newest = max(dates)
    return ApkPackage(
        path=path,
        entries=tuple((i.filename, i.file_size) for i in infos),
        sha256=digest,
        newest_entry_date=newest if newest >= _PLACEHOLDER_BEFORE else None,
    )


def _abi_of(name: str) -> str | None:
    parts = name.split("/")
    if len(parts) >= 3 and parts[0] == "lib" and name.endswith(".so"):
        return parts[1]
    return None


def available_abis(apk: ApkPackage) -> set[str]:
    return {abi for abi in map(_abi_of, apk.names) if abi}


def has_native_code(apk: ApkPackage) -> bool:
    return bool(available_abis(apk))


def select_abi(available, preference=ABI_PREFERENCE) -> str | None:
    """First ABI of ``preference`` that is present, else None."""
    available = set(available)
    for abi in preference:
        if abi in available:
            return abi
    return None


def extract_native_libraries(apk: ApkPackage, abi: str,
                             problems: list | None = None) -> list[NativeLibraryBlob]:
    """Decompress every ``lib/<abi>/*.so`` member, in archive order.

    Members that fail to decompress are skipped; a CorruptEntry is logged
    and appended to ``problems`` when given.
    """
    out = []
    try:
        zf = zipfile.ZipFile(apk.path)
    except (zipfile.BadZipFile, OSError) as exc:
        raise IoFailure(f"{apk.path}: {exc}") from exc
    with zf:
        for info in zf.infolist():
            if info.is_dir() or _abi_of(info.filename) != abi:
                continue
            try:
                data = zf.read(info)
            except (zipfile.BadZipFile, zlib.error, EOFError, OSError,
                    NotImplementedError, RuntimeError) as exc:
                rec = CorruptEntry(info.filename, f"{type(exc).__name__}: {exc}")
                log.warning("skipping corrupt entry %s in %s: %s", info.filename, apk.path, exc)
                if problems is not None:
                    problems.append(rec)
                continue
            out.append(NativeLibraryBlob(info.filename, abi, data))
    return out


@dataclass
class Sidecar:
    """Androzoo-style ``sha256,dex_date,market`` table keyed by digest."""

    rows: dict[str, tuple[dt.date | None, str | None]] = field(default_factory=dict)
    errors: list[MalformedSidecarRow] = field(default_factory=list)

    @classmethod
    def read(cls, path, today: dt.date | None = None) -> "Sidecar":
        today = today or dt.date.today()
        out = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = {"sha256", "dex_date", "market"} - set(reader.fieldnames or ())
            if missing:
                out.errors.append(MalformedSidecarRow(1, f"missing columns {sorted(missing)}"))
                return out
            for lineno, row in enumerate(reader, 2):
                sha = (row.get("sha256") or "").strip().lower()
                raw_date = (row.get("dex_date") or "").strip()
                market = (row.get("market") or "").strip() or None
                if len(sha) != 64 or any(c not in "0123456789abcdef" for c in sha):
                    out._bad(lineno, f"bad sha256 {sha!r}")
                    continue
                date = None
                if raw_date:
                    try:
                        date = dt.date.fromisoformat(raw_date[:10])
                    except ValueError:
                        out._bad(lineno, f"unparseable date {raw_date!r}")
                        continue
                    if date > today:
                        out._bad(lineno, f"release date {date} is in the future")
                        continue
                out.rows[sha] = (date, market)
        return out

    def _bad(self, lineno: int, reason: str) -> None:
        log.warning("sidecar line %d skipped: %s", lineno, reason)
        self.errors.append(MalformedSidecarRow(lineno, reason))


def load_metadata(apk: ApkPackage, sidecar: Sidecar | None = None,
                  use_zip_dates: bool = True, today: dt.date | None = None) -> AppMetadata:
    """Release date and market for an app.

    The sidecar wins; otherwise the newest archive timestamp is used as a
    low-confidence release date.
    """
    if sidecar is not None and apk.sha256 in sidecar.rows:
        date, market = sidecar.rows[apk.sha256]
        return AppMetadata(apk.sha256, date, market, "sidecar" if date else None)
    if use_zip_dates and apk.newest_entry_date is not None:
        if apk.newest_entry_date <= (today or dt.date.today()):
            return AppMetadata(apk.sha256, apk.newest_entry_date, None, "zip-mtime")
    return AppMetadata(apk.sha256)

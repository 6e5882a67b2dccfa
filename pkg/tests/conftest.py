import datetime as dt
import hashlib
import zipfile
from pathlib import Path

import pytest

from nativerisk.cvedb import build_database, ingest_feed
from nativerisk.fingerprint import load_signatures

DATA = Path(__file__).parent / "data"
ELF_DIR = DATA / "elf"
FEEDS = DATA / "feeds"
ABIS = ("armeabi-v7a", "arm64-v8a", "x86_64")
FIXED_ZIP_TIME = (1980, 1, 1, 0, 0, 0)
SCAN_TIME = dt.datetime(2024, 1, 1, tzinfo=dt.timezone.utc)


def elf_fixture(abi: str, name: str) -> Path:
    return ELF_DIR / abi / name


def make_apk(path: Path, libs=(), extra=(), date_time=FIXED_ZIP_TIME) -> Path:
    """Write a minimal APK: a dex stub, then ``libs`` as (archive_path, bytes or fixture Path)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr(zipfile.ZipInfo("AndroidManifest.xml", date_time), b"<manifest/>")
        zf.writestr(zipfile.ZipInfo("classes.dex", date_time), b"dex\n035\0" + path.name.encode())
        for arc, content in list(libs) + list(extra):
            if isinstance(content, Path):
                content = content.read_bytes()
            info = zipfile.ZipInfo(arc, date_time)
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, content)
    return path


@pytest.fixture(scope="session")
def sigs():
    return load_signatures()


@pytest.fixture(scope="session")
def heartbleed_db(sigs):
    return build_database(ingest_feed(FEEDS / "CVE-2014-0160.json"), sigs)


@pytest.fixture(scope="session")
def fixture_db(sigs):
    return build_database(ingest_feed(FEEDS / "fixture_feed.json"), sigs)


@pytest.fixture(scope="session")
def ccs_db(sigs):
    raw = ingest_feed(FEEDS / "nvd11_cve-2014-0224_v2only.json", include_v2=True)
    return build_database(raw, sigs)


def _lib(abi, name, fixture=None):
    return (f"lib/{abi}/{name}", elf_fixture(abi, fixture or name))


# name -> (libs, sidecar date, market); None means no sidecar row
CORPUS = {
    "01_ssl": ([_lib("armeabi-v7a", "libssl.so")], "2014-05-02", "play.google.com"),
    "02_ssl_hidden": ([_lib("arm64-v8a", "libssl.so", "libssl_hidden.so")], "2014-08-30", "anzhi"),
    "03_png": ([_lib("x86_64", "libpng16.so")], "2018-10-11", "play.google.com"),
    "04_opencv": ([_lib("armeabi-v7a", "libopencv_core.so")], "2019-06-20", None),
    "05_webp": ([_lib("armeabi-v7a", "libwebp.so")], "2021-03-01", "appchina"),
    "06_game": ([_lib("armeabi-v7a", "libgame.so")], "2019-01-15", "play.google.com"),
    "07_multi": ([_lib("armeabi-v7a", "libssl.so"), _lib("armeabi-v7a", "libpng16.so"),
                  _lib("armeabi-v7a", "libgame.so"), _lib("arm64-v8a", "libopencv_core.so")],
                 "2019-02-02", "anzhi"),
    "08_java_only": ([], "2019-07-07", "play.google.com"),
    "09_java_only": ([], None, None),
    "10_mips_only": ([("lib/mips/libfoo.so", b"\x7fELF")], "2016-01-01", "appchina"),
}


def build_corpus(directory: Path):
    """Write the ten-APK corpus and its sidecar; returns (apk paths, sidecar path)."""
    directory.mkdir(parents=True, exist_ok=True)
    paths, rows = [], []
    for name, (libs, date, market) in CORPUS.items():
        path = make_apk(directory / f"{name}.apk", libs)
        paths.append(path)
        if date is not None:
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            rows.append(f"{digest},{date},{market or ''}\n")
    sidecar = directory.parent / f"{directory.name}-sidecar.csv"
    sidecar.write_text("sha256,dex_date,market\n" + "".join(rows))
    return paths, sidecar



def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, ordered by criterion number."""
    rows = []
    for outcome, word in (("passed", "PASS"), ("failed", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(rep.user_properties)
            if rep.when != "call" or "criterion" not in props:
                continue
            detail = props.get("detail", "")
            if outcome == "failed" and getattr(rep.longrepr, "reprcrash", None):
                detail = rep.longrepr.reprcrash.message.splitlines()[0]
            rows.append((props["criterion"], word, detail))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, word, detail in sorted(rows):
            terminalreporter.write_line(f"{word} {name}: {detail}")

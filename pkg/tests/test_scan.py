import datetime as dt
import hashlib

import pytest

from conftest import SCAN_TIME, build_corpus, elf_fixture, make_apk
from nativerisk.apk import Sidecar
from nativerisk.risk import RiskLevel, VulnLevel
from nativerisk.scan import ScanConfig, Scanner, scan_apk, scan_many

CONFIG = ScanConfig(scan_time=SCAN_TIME)


def only_finding(report):
    (lib,) = report.libraries
    (f,) = lib.findings
    return lib, f


def test_stripped_openssl_high_path(tmp_path, ccs_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/arm64-v8a/libssl.so",
                                         elf_fixture("arm64-v8a", "libssl_hidden.so"))])
    report = scan_apk(apk, ccs_db, sigs, CONFIG)
    lib, f = only_finding(report)
    assert lib.stripped
    assert (f.cve_id, f.vuln_level, f.threat_impact) == ("CVE-2014-0224", VulnLevel.HIGH, 55.04)
    assert report.app_risk == RiskLevel.HIGH


def test_heartbleed_db_version_only_gives_high_evidence(tmp_path, heartbleed_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/libssl.so",
                                         elf_fixture("armeabi-v7a", "libssl.so"))])
    lib, f = only_finding(scan_apk(apk, heartbleed_db, sigs, CONFIG))
    # the NVD text names source files, not functions, so no function evidence exists
    assert f.vuln_level == VulnLevel.HIGH
    assert "entry names no function" in f.rationale[0]


def test_webp_medium_path(tmp_path, fixture_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/libwebp.so",
                                         elf_fixture("armeabi-v7a", "libwebp.so"))])
    digest = hashlib.sha256(apk.read_bytes()).hexdigest()
    side = tmp_path / "s.csv"
    side.write_text(f"sha256,dex_date,market\n{digest},2021-03-01,appchina\n")
    report = Scanner(fixture_db, sigs, CONFIG).scan(apk, Sidecar.read(side))
    lib, f = only_finding(report)
    assert f.vuln_level == VulnLevel.MEDIUM and f.risk == RiskLevel.MEDIUM
    assert report.metadata.market == "appchina"


def test_webp_without_release_date_downgrades(tmp_path, fixture_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/libwebp.so",
                                         elf_fixture("armeabi-v7a", "libwebp.so"))])
    lib, f = only_finding(scan_apk(apk, fixture_db, sigs, CONFIG))
    assert f.vuln_level == VulnLevel.LOW


def test_unmatched_library_is_none(tmp_path, fixture_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/x86_64/libgame.so",
                                         elf_fixture("x86_64", "libgame.so"))])
    report = scan_apk(apk, fixture_db, sigs, CONFIG)
    assert report.libraries[0].products == () and report.app_risk == RiskLevel.NONE


def test_matched_product_without_cves_is_low(tmp_path, heartbleed_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/x86_64/libpng16.so",
                                         elf_fixture("x86_64", "libpng16.so"))])
    report = scan_apk(apk, heartbleed_db, sigs, CONFIG)
    assert report.libraries[0].findings == () and report.app_risk == RiskLevel.LOW


def test_non_elf_library_recorded(tmp_path, fixture_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/libbad.so", b"not an elf"),
                                        ("lib/armeabi-v7a/libgame.so",
                                         elf_fixture("armeabi-v7a", "libgame.so"))])
    report = scan_apk(apk, fixture_db, sigs, CONFIG)
    bad, good = report.libraries
    assert bad.error.startswith("NotAnElf") and good.error is None


def test_no_preferred_abi(tmp_path, fixture_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/mips/libfoo.so", b"\x7fELF")])
    report = scan_apk(apk, fixture_db, sigs, CONFIG)
    assert report.has_native_code and report.abi is None and report.app_risk == RiskLevel.NONE


def test_abi_override(tmp_path, fixture_db, sigs):
    apk = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/libgame.so",
                                         elf_fixture("armeabi-v7a", "libgame.so")),
                                        ("lib/x86_64/libpng16.so",
                                         elf_fixture("x86_64", "libpng16.so"))])
    config = ScanConfig(scan_time=SCAN_TIME, abi_override=("x86_64",))
    report = scan_apk(apk, fixture_db, sigs, config)
    assert report.abi == "x86_64" and report.libraries[0].library_name == "libpng16.so"


def test_config_validation(tmp_path):
    with pytest.raises(FileNotFoundError):
        ScanConfig(database_path=tmp_path / "missing.jsonl").validate()
    with pytest.raises(ValueError):
        ScanConfig(min_string_len=0).validate()


def test_scan_timestamp_format(tmp_path, fixture_db, sigs):
    report = scan_apk(make_apk(tmp_path / "a.apk"), fixture_db, sigs, CONFIG)
    assert report.scan_timestamp == "2024-01-01T00:00:00Z"


def test_source_date_epoch(tmp_path, fixture_db, sigs, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "86400")
    report = scan_apk(make_apk(tmp_path / "a.apk"), fixture_db, sigs, ScanConfig())
    assert report.scan_timestamp == "1970-01-02T00:00:00Z"


def test_batch_isolates_failures(tmp_path, fixture_db, sigs):
    paths, _ = build_corpus(tmp_path / "apks")
    broken = tmp_path / "apks" / "00_broken.apk"
    broken.write_bytes(b"PK\x03\x04 truncated")
    results = scan_many(paths + [broken], fixture_db, sigs, CONFIG, jobs=2)
    assert len(results) == 11
    failed = [r for r in results if r[2]]
    assert [r[0] for r in failed] == [str(broken)]
    assert failed[0][2].startswith("NotAnArchive")


def test_corpus_expected_risks(tmp_path, fixture_db, sigs):
    paths, side = build_corpus(tmp_path / "apks")
    results = scan_many(paths, fixture_db, sigs, CONFIG, Sidecar.read(side, dt.date(2024, 1, 1)),
                        jobs=1)
    got = {p.rsplit("/", 1)[-1]: r.app_risk.name for p, r, _ in results}
    assert got == {
        "01_ssl.apk": "MEDIUM",         # 1.0.1f admitted, no function named: HIGH x LOW severity
        "02_ssl_hidden.apk": "MEDIUM",  # same, stripped
        "03_png.apk": "MEDIUM",         # 1.6.34 admitted by both libpng entries
        "04_opencv.apk": "MEDIUM",      # 4.1.0 before 4.1.1
        "05_webp.apk": "MEDIUM",        # no version, PutLE16 present, released within two years
        "06_game.apk": "NONE",
        "07_multi.apk": "MEDIUM",
        "08_java_only.apk": "NONE",
        "09_java_only.apk": "NONE",
        "10_mips_only.apk": "NONE",
    }

import datetime as dt
import subprocess
import zipfile

import pytest

from conftest import elf_fixture, make_apk
from nativerisk.apk import (Sidecar, available_abis, extract_native_libraries, has_native_code,
                            load_metadata, open_apk, select_abi)
from nativerisk.errors import CorruptEntry, IoFailure, NotAnArchive

TODAY = dt.date(2024, 1, 1)


def corrupt_member(path, member):
    """Overwrite the middle of one member's compressed data."""
    with zipfile.ZipFile(path) as zf:
        info = zf.getinfo(member)
    data = bytearray(path.read_bytes())
    name_len = int.from_bytes(data[info.header_offset + 26:info.header_offset + 28], "little")
    extra_len = int.from_bytes(data[info.header_offset + 28:info.header_offset + 30], "little")
    start = info.header_offset + 30 + name_len + extra_len
    mid = start + info.compress_size // 2
    data[mid:mid + 16] = b"\xff" * 16
    path.write_bytes(bytes(data))


def test_listing(tmp_path):
    p = tmp_path / "a.apk"
    with zipfile.ZipFile(p, "w") as zf:
        for name in ("AndroidManifest.xml", "classes.dex", "lib/x86_64/libfoo.so"):
            zf.writestr(name, b"x")
    apk = open_apk(p)
    assert apk.names == ["AndroidManifest.xml", "classes.dex", "lib/x86_64/libfoo.so"]


def test_digest_matches_sha256sum(tmp_path):
    p = make_apk(tmp_path / "a.apk", [("lib/x86_64/libssl.so", elf_fixture("x86_64", "libssl.so"))])
    expected = subprocess.run(["sha256sum", str(p)], capture_output=True, text=True,
                              check=True).stdout.split()[0]
    assert open_apk(p).sha256 == expected


def test_empty_file(tmp_path):
    p = tmp_path / "empty.apk"
    p.write_bytes(b"")
    with pytest.raises(NotAnArchive):
        open_apk(p)


def test_archive_without_entries(tmp_path):
    p = tmp_path / "e.apk"
    zipfile.ZipFile(p, "w").close()
    with pytest.raises(NotAnArchive):
        open_apk(p)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        open_apk(tmp_path / "nope.apk")


@pytest.mark.parametrize("available,expected", [
    ({"armeabi-v7a", "arm64-v8a"}, "armeabi-v7a"),
    ({"x86_64"}, "x86_64"),
    ({"mips"}, None),
    ({"arm64-v8a", "x86_64"}, "arm64-v8a"),
    (set(), None),
])
def test_select_abi(available, expected):
    assert select_abi(available) == expected


def test_select_abi_custom_preference():
    assert select_abi({"armeabi-v7a", "x86_64"}, ("x86_64", "armeabi-v7a")) == "x86_64"


def test_one_library(tmp_path):
    p = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/libfoo.so", b"\x7fELF...")])
    apk = open_apk(p)
    (blob,) = extract_native_libraries(apk, "armeabi-v7a")
    assert blob.name == "libfoo.so" and blob.data == b"\x7fELF..."
    assert available_abis(apk) == {"armeabi-v7a"} and has_native_code(apk)


def test_other_abi_ignored(tmp_path):
    p = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/liba.so", b"a"),
                                      ("lib/x86_64/libb.so", b"b"),
                                      ("assets/lib/armeabi-v7a/notlib.txt", b"c")])
    assert [b.name for b in extract_native_libraries(open_apk(p), "x86_64")] == ["libb.so"]


def test_no_lib_directory(tmp_path):
    apk = open_apk(make_apk(tmp_path / "a.apk"))
    assert extract_native_libraries(apk, "armeabi-v7a") == []
    assert not has_native_code(apk)


def test_corrupt_entry_skipped(tmp_path):
    good = elf_fixture("armeabi-v7a", "libpng16.so")
    bad = elf_fixture("armeabi-v7a", "libssl.so")
    p = make_apk(tmp_path / "a.apk", [("lib/armeabi-v7a/libpng16.so", good),
                                      ("lib/armeabi-v7a/libssl.so", bad)])
    corrupt_member(p, "lib/armeabi-v7a/libssl.so")
    problems = []
    blobs = extract_native_libraries(open_apk(p), "armeabi-v7a", problems)
    assert [b.name for b in blobs] == ["libpng16.so"]
    assert blobs[0].data == good.read_bytes()
    assert len(problems) == 1 and isinstance(problems[0], CorruptEntry)
    assert problems[0].archive_path == "lib/armeabi-v7a/libssl.so"


def write_sidecar(path, rows):
    path.write_text("sha256,dex_date,market\n" + "".join(",".join(r) + "\n" for r in rows))
    return path


def test_sidecar_lookup(tmp_path):
    apk = open_apk(make_apk(tmp_path / "a.apk"))
    sc = Sidecar.read(write_sidecar(tmp_path / "s.csv", [(apk.sha256, "2019-03-01",
                                                          "play.google.com")]), TODAY)
    m = load_metadata(apk, sc)
    assert (m.release_date, m.market, m.release_date_source) == (
        dt.date(2019, 3, 1), "play.google.com", "sidecar")


def test_sidecar_timestamp_dates(tmp_path):
    apk = open_apk(make_apk(tmp_path / "a.apk"))
    sc = Sidecar.read(write_sidecar(tmp_path / "s.csv", [(apk.sha256.upper(), "2019-03-01 10:22:01",
                                                          "anzhi")]), TODAY)
    assert load_metadata(apk, sc).release_date == dt.date(2019, 3, 1)


def test_digest_absent(tmp_path):
    apk = open_apk(make_apk(tmp_path / "a.apk"))
    sc = Sidecar.read(write_sidecar(tmp_path / "s.csv", [("a" * 64, "2019-03-01", "x")]), TODAY)
    m = load_metadata(apk, sc)
    assert m.release_date is None and m.market is None


@pytest.mark.parametrize("date", ["yesterday", "2019-13-01", "2031-01-01"])
def test_malformed_row(tmp_path, date):
    apk = open_apk(make_apk(tmp_path / "a.apk"))
    sc = Sidecar.read(write_sidecar(tmp_path / "s.csv", [(apk.sha256, date, "play")]), TODAY)
    assert len(sc.errors) == 1 and sc.errors[0].line == 2
    m = load_metadata(apk, sc)
    assert m.release_date is None and m.market is None


def test_bad_digest_row(tmp_path):
    sc = Sidecar.read(write_sidecar(tmp_path / "s.csv", [("xyz", "2019-01-01", "play")]), TODAY)
    assert sc.rows == {} and len(sc.errors) == 1


def test_zip_timestamp_fallback(tmp_path):
    apk = open_apk(make_apk(tmp_path / "a.apk", date_time=(2019, 5, 1, 12, 0, 0)))
    m = load_metadata(apk, None, today=TODAY)
    assert (m.release_date, m.release_date_source) == (dt.date(2019, 5, 1), "zip-mtime")
    assert load_metadata(apk, None, use_zip_dates=False).release_date is None


def test_placeholder_zip_dates_ignored(tmp_path):
    apk = open_apk(make_apk(tmp_path / "a.apk"))
    assert load_metadata(apk, None, today=TODAY).release_date is None

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import FEEDS, SCAN_TIME, elf_fixture, make_apk
from nativerisk.cvedb import ingest_feed
from nativerisk.estimator import NativeRiskEstimator


def test_params_round_trip():
    est = NativeRiskEstimator(include_v2=True, min_string_len=6)
    params = est.get_params()
    assert params["include_v2"] and params["min_string_len"] == 6
    twin = clone(est)
    assert twin.get_params() == params and not hasattr(twin, "database_")


def test_predict_before_fit(tmp_path):
    with pytest.raises(NotFittedError):
        NativeRiskEstimator().predict([make_apk(tmp_path / "a.apk")])


def test_fit_from_paths_and_records():
    by_path = NativeRiskEstimator().fit([FEEDS / "fixture_feed.json"])
    by_record = NativeRiskEstimator().fit(ingest_feed(FEEDS / "fixture_feed.json"))
    assert by_path.n_entries_ == by_record.n_entries_ == 5


def test_predict(tmp_path):
    apks = [make_apk(tmp_path / "a.apk"),
            make_apk(tmp_path / "b.apk", [("lib/armeabi-v7a/libssl.so",
                                           elf_fixture("armeabi-v7a", "libssl.so"))])]
    est = NativeRiskEstimator(scan_time=SCAN_TIME).fit([FEEDS / "fixture_feed.json"])
    assert list(est.predict(apks)) == ["NONE", "MEDIUM"]
    assert est.transform(apks)[0].scan_timestamp == "2024-01-01T00:00:00Z"


def test_include_v2_changes_outcome(tmp_path):
    apk = make_apk(tmp_path / "a.apk", [("lib/arm64-v8a/libssl.so",
                                         elf_fixture("arm64-v8a", "libssl_hidden.so"))])
    feed = [FEEDS / "nvd11_cve-2014-0224_v2only.json"]
    assert NativeRiskEstimator(scan_time=SCAN_TIME).fit(feed).n_entries_ == 0
    est = NativeRiskEstimator(include_v2=True, scan_time=SCAN_TIME).fit(feed)
    assert list(est.predict([apk])) == ["HIGH"]

"""scikit-learn style facade over the scan pipeline.

``fit`` builds the CVE database from feeds (or parsed records),
``transform`` turns APK paths into reports and ``predict`` into app risk
levels. There is no learning involved; the estimator shape only makes the
pipeline easy to drop into code that already speaks fit/predict.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .cvedb import CveRaw, build_database, ingest_feed
from .fingerprint import load_signatures
from .scan import ScanConfig, Scanner


class NativeRiskEstimator(BaseEstimator):
    def __init__(self, signature_path=None, include_v2=False, min_string_len=4,
                 strict_before=False, abi_preference=None, scan_time=None):
        self.signature_path = signature_path
        self.include_v2 = include_v2
        self.min_string_len = min_string_len
        self.strict_before = strict_before
        self.abi_preference = abi_preference
        self.scan_time = scan_time

    def fit(self, X, y=None):
        """X: feed file paths and/or CveRaw records."""
        self.signatures_ = load_signatures(self.signature_path)
        raw = []
        for item in X:
            if isinstance(item, CveRaw):
                raw.append(item)
            else:
                raw += ingest_feed(item, include_v2=self.include_v2)
        self.database_ = build_database(raw, self.signatures_)
        self.n_entries_ = len(self.database_.entries)
        return self

    def _scanner(self) -> Scanner:
        check_is_fitted(self, "database_")
        config = ScanConfig(
            signature_path=self.signature_path,
            abi_override=tuple(self.abi_preference) if self.abi_preference else None,
            min_string_len=self.min_string_len,
            strict_before=self.strict_before,
            scan_time=self.scan_time,
        )
        return Scanner(self.database_, self.signatures_, config)

    def transform(self, X) -> list:
        """APK paths to AppReport objects."""
        scanner = self._scanner()
        return [scanner.scan(path) for path in X]

    def predict(self, X) -> np.ndarray:
        """APK paths to app risk level names."""
        return np.array([r.app_risk.name for r in self.transform(X)], dtype=object)

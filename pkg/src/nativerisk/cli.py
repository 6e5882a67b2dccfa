"""Command line entry point: build-db, scan, batch, stats.

Data goes to files; diagnostics go to stderr. ``scan`` exits with a code
derived from the app risk (0 NONE/LOW, 2 MEDIUM, 3 HIGH, 4 CRITICAL) so it
can gate a CI pipeline; 1 means the scan itself failed.
"""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import sys
from collections import Counter
from pathlib import Path

from .apk import Sidecar
from .cvedb import build_database, ingest_feed, load_database, save_database
from .errors import IoFailure, NativeRiskError, NotAnArchive, UnrecognizedFeedFormat
from .fingerprint import load_signatures
from .report import aggregate_stats, emit_app_report, emit_cve_log, parse_app_report
from .risk import RiskLevel
from .scan import ScanConfig, Scanner, scan_many

log = logging.getLogger("nativerisk")

EXIT_OK = 0
EXIT_FAILURE = 1
RISK_EXIT = {
    RiskLevel.NONE: 0,
    RiskLevel.LOW: 0,
    RiskLevel.MEDIUM: 2,
    RiskLevel.HIGH: 3,
    RiskLevel.CRITICAL: 4,
}


def exit_status(risk: RiskLevel) -> int:
    return RISK_EXIT[RiskLevel(risk)]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which would read as MEDIUM risk
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAILURE, f"{self.prog}: error: {message}\n")


def _timestamp(text: str) -> dt.datetime:
    value = dt.datetime.fromisoformat(text.replace("Z", "+00:00"))
    if value.tzinfo is None:
        value = value.replace(tzinfo=dt.timezone.utc)
    return value.astimezone(dt.timezone.utc)


def _add_scan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--db", dest="database_path", type=Path, required=True,
                   help="CVE database written by build-db")
    p.add_argument("--signatures", dest="signature_path", type=Path,
                   help="signature file (default: the bundled set)")
    p.add_argument("--abi", dest="abi_override", action="append", metavar="ABI",
                   help="ABI preference, repeatable, first wins")
    p.add_argument("--min-string-len", type=int, default=4)
    p.add_argument("--strict-before", action="store_true",
                   help="treat 'before X' bounds as excluding X")
    p.add_argument("--sidecar", type=Path, help="CSV with sha256,dex_date,market")
    p.add_argument("--scan-time", type=_timestamp,
                   help="ISO timestamp recorded in reports (default: now or SOURCE_DATE_EPOCH)")
    p.add_argument("--no-zip-dates", dest="use_zip_dates", action="store_false",
                   help="do not fall back to archive timestamps for release dates")
    p.add_argument("-o", "--output-dir", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nativerisk",
                     description="Risk assessment of native libraries in Android apps.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-db", help="build the CVE database from NVD feeds")
    p.add_argument("feeds", nargs="+", type=Path)
    p.add_argument("--signatures", dest="signature_path", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--include-v2", action="store_true",
                   help="use CVSS v2 subscores when no v3 metric exists")
    p.set_defaults(func=cmd_build_db)

    p = sub.add_parser("scan", help="scan one APK")
    p.add_argument("apk", type=Path)
    _add_scan_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("batch", help="scan every APK in a directory")
    p.add_argument("directory", type=Path)
    _add_scan_flags(p)
    p.add_argument("-j", "--jobs", type=int, default=None,
                   help="worker processes (default: all cores)")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("stats", help="aggregate app risk by year or market")
    p.add_argument("report_dir", type=Path)
    p.add_argument("--key", choices=("year", "market"), required=True)
    p.add_argument("--out", type=Path, help="CSV path (default: <report_dir>/stats-<key>.csv)")
    p.set_defaults(func=cmd_stats)
    return parser


def _config(args) -> ScanConfig:
    return ScanConfig(
        signature_path=args.signature_path,
        database_path=args.database_path,
        abi_override=tuple(args.abi_override) if args.abi_override else None,
        min_string_len=args.min_string_len,
        strict_before=args.strict_before,
        output_dir=args.output_dir,
        scan_time=args.scan_time,
        use_zip_dates=args.use_zip_dates,
    )


def _sidecar(args, config: ScanConfig):
    if args.sidecar is None:
        return None
    sc = Sidecar.read(args.sidecar, config.timestamp().date())
    for bad in sc.errors:
        print(f"sidecar line {bad.line}: {bad.reason}", file=sys.stderr)
    return sc


def cmd_build_db(args) -> int:
    sigs = load_signatures(args.signature_path)
    skipped: list = []
    raw = []
    for feed in args.feeds:
        try:
            raw += ingest_feed(feed, include_v2=args.include_v2, skipped=skipped)
        except UnrecognizedFeedFormat as exc:
            print(f"{feed}: unrecognized feed format: {exc}", file=sys.stderr)
            return EXIT_FAILURE
        except OSError as exc:
            print(f"{feed}: {exc}", file=sys.stderr)
            return EXIT_FAILURE
    db = build_database(raw, sigs, skipped)
    save_database(db, args.out)
    for rec in skipped:
        print(f"skipped {rec.cve_id or '?'} ({rec.source}): {rec.reason}", file=sys.stderr)
    counts = Counter(e.product for e in db.entries)
    for product in sigs.products:
        print(f"{product}\t{counts.get(product, 0)}", file=sys.stderr)
    print(f"wrote {len(db.entries)} entries to {args.out}", file=sys.stderr)
    return EXIT_OK


def _write_report(report, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.apk_id}.json"
    path.write_bytes(emit_app_report(report))
    return path


def cmd_scan(args) -> int:
    config = _config(args)
    try:
        scanner = Scanner.from_config(config)
        report = scanner.scan(args.apk, _sidecar(args, config))
    except (NotAnArchive, IoFailure) as exc:
        print(f"cannot scan {args.apk}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (NativeRiskError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    path = _write_report(report, config.output_dir)
    print(f"{args.apk}: app risk {report.app_risk.name}, report {path}", file=sys.stderr)
    return exit_status(report.app_risk)


def cmd_batch(args) -> int:
    config = _config(args)
    try:
        config.validate()
        if not args.directory.is_dir():
            raise NotADirectoryError(f"{args.directory} is not a directory")
        scanner = Scanner.from_config(config)
        sidecar = _sidecar(args, config)
    except (NativeRiskError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    paths = sorted(p for p in args.directory.iterdir() if p.is_file() and p.suffix == ".apk")
    results = scan_many(paths, scanner.db, scanner.sigs, config, sidecar, args.jobs)
    reports = {}
    for path, report, error in results:
        if error:
            print(f"failed {path}: {error}", file=sys.stderr)
            continue
        reports[report.apk_id] = report
    for report in reports.values():
        _write_report(report, config.output_dir)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / "cve.log").write_bytes(emit_cve_log(reports.values()))
    scanned = [r for _, r, _ in results if r is not None]
    native = sum(r.has_native_code for r in scanned)
    failed = len(results) - len(scanned)
    print(f"scanned {len(scanned)} APKs, {failed} failed: "
          f"{native}/{len(scanned)} with native code", file=sys.stderr)
    return EXIT_OK


def load_reports(report_dir: Path):
    reports = []
    for path in sorted(report_dir.glob("*.json")):
        try:
            reports.append(parse_app_report(path.read_bytes()))
        except (ValueError, KeyError) as exc:
            print(f"skipping {path}: not a report ({exc})", file=sys.stderr)
    return reports


def cmd_stats(args) -> int:
    if not args.report_dir.is_dir():
        print(f"error: {args.report_dir} is not a directory", file=sys.stderr)
        return EXIT_FAILURE
    reports = load_reports(args.report_dir)
    if not reports:
        print(f"error: no reports found in {args.report_dir}", file=sys.stderr)
        return EXIT_FAILURE
    table = aggregate_stats(reports, args.key)
    out = args.out or args.report_dir / f"stats-{args.key}.csv"
    out.write_text(table.to_csv(), encoding="utf-8")
    print(f"wrote {len(table.rows)} rows for {len(reports)} reports to {out}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

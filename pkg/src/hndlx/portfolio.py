"""Portfolio ingestion, batch scoring, and JSON-lines persistence.

CSV interchange schema (header required, UTF-8, LF or CRLF):

    org_id,V,E,T_D,sector_id,M

Persistence is a single JSON-lines file: one header record carrying the
format version and provenance, then one record per organization. Floats
serialize via repr so round trips are bit-exact.
"""

from __future__ import annotations

import csv
import datetime
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CorruptFileError,
    FormatError,
    IngestError,
    MigrationNeededError,
    UndefinedCorrelationError,
)
from .model import (
    DEFAULT_M_MAX,
    ModelParams,
    OrganizationProfile,
    ScoreReport,
    SectorPrior,
    ieq_score,
)
from .population import Portfolio, spearman

FORMAT_VERSION = "1"
CSV_COLUMNS = ("org_id", "V", "E", "T_D", "sector_id", "M")
DEFAULT_ERROR_BUDGET = 0.10

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class RowError:
    """One rejected input row and every reason it was rejected."""

    row: int                       # 1-based data row (header excluded)
    org_id: str | None
    errors: tuple[tuple[str, str], ...]

    @property
    def message(self) -> str:
        detail = "; ".join(f"{f}: {m}" for f, m in self.errors)
        who = f" (org_id={self.org_id})" if self.org_id else ""
        return f"row {self.row}{who}: {detail}"

    def to_dict(self) -> dict:
        return {"row": self.row, "org_id": self.org_id,
                "errors": [list(e) for e in self.errors]}


@dataclass
class IngestResult:
    portfolio: Portfolio
    row_errors: list[RowError]
    n_rows: int


def _profile_from_record(record: dict, row: int,
                         m_max: float) -> tuple[OrganizationProfile | None, RowError | None]:
    missing = [c for c in CSV_COLUMNS if c not in record or record[c] in (None, "")]
    if missing:
        return None, RowError(row, record.get("org_id") or None,
                              tuple((c, "missing") for c in missing))
    try:
        profile = OrganizationProfile(
            org_id=str(record["org_id"]),
            V=float(record["V"]), E=float(record["E"]), T_D=float(record["T_D"]),
            sector_id=str(record["sector_id"]), M=float(record["M"]))
    except (TypeError, ValueError) as exc:
        org_id = record.get("org_id")
        return None, RowError(row, str(org_id) if org_id is not None else None,
                              (("parse", str(exc)),))
    errors = profile.validate(m_max=m_max)
    if errors:
        return None, RowError(row, profile.org_id, tuple(errors))
    return profile, None


def ingest_portfolio(path: str | Path, fmt: str = "csv",
                     error_budget: float = DEFAULT_ERROR_BUDGET,
                     m_max: float = DEFAULT_M_MAX) -> IngestResult:
    """Read and validate a portfolio file.

    Row failures are collected, not fatal; the whole file is rejected only
    when the bad-row fraction exceeds the error budget or org_ids repeat.
    Every input row ends up either as an accepted profile or as exactly one
    RowError.
    """
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise FormatError(f"unknown format {fmt!r}, expected csv or json")
    if not path.exists():
        raise FileNotFoundError(f"portfolio file not found: {path}")

    records: list[dict] = []
    if fmt == "csv":
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                try:
                    header = next(reader)
                except StopIteration:
                    raise FormatError(f"{path}: empty file, header required") from None
                header = [h.strip() for h in header]
                if header != list(CSV_COLUMNS):
                    raise FormatError(
                        f"{path}: header must be {','.join(CSV_COLUMNS)}, "
                        f"got {','.join(header)}")
                for line_no, row in enumerate(reader, start=2):
                    if not row or all(not cell.strip() for cell in row):
                        continue
                    if len(row) != len(CSV_COLUMNS):
                        records.append({"__bad_shape__": line_no, "org_id": row[0] if row else None})
                        continue
                    records.append(dict(zip(CSV_COLUMNS, (cell.strip() for cell in row))))
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: not UTF-8 at byte {exc.start}") from exc
    else:
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, "
                              f"column {exc.colno}") from exc
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: not UTF-8 at byte {exc.start}") from exc
        if not isinstance(raw, list):
            raise FormatError(f"{path}: expected a JSON array of profiles")
        records = [r if isinstance(r, dict) else {"__bad_shape__": i + 1}
                   for i, r in enumerate(raw)]

    profiles: list[OrganizationProfile] = []
    row_errors: list[RowError] = []
    for i, record in enumerate(records, start=1):
        if "__bad_shape__" in record:
            row_errors.append(RowError(i, record.get("org_id"),
                                       (("row", "wrong column count or not an object"),)))
            continue
        profile, err = _profile_from_record(record, i, m_max)
        if err is not None:
            row_errors.append(err)
        else:
            profiles.append(profile)

    n_rows = len(records)
    if n_rows == 0:
        raise IngestError(f"{path}: no data rows")
    if len(row_errors) / n_rows > error_budget:
        raise IngestError(
            f"{path}: {len(row_errors)}/{n_rows} rows invalid, exceeds "
            f"error budget {error_budget:.0%}")

    ids = [p.org_id for p in profiles]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise IngestError(f"{path}: duplicate org_id values: {dupes[:5]}")

    return IngestResult(
        portfolio=Portfolio(profiles=tuple(profiles), provenance="ingested",
                            spec_or_source=str(path)),
        row_errors=row_errors,
        n_rows=n_rows)


# ---------------------------------------------------------------------------
# batch scoring
# ---------------------------------------------------------------------------


@dataclass
class ScoringResult:
    reports: list[ScoreReport]
    errors: list[RowError]
    summary: dict


def _score_chunk(profiles, params, sector_table, t0, m_max, offset):
    reports, errors = [], []
    for i, profile in enumerate(profiles):
        prior = sector_table.get(profile.sector_id)
        if prior is None:
            errors.append(RowError(offset + i + 1, profile.org_id,
                                   (("sector_id", f"unknown sector {profile.sector_id!r}"),)))
            continue
        reports.append(ieq_score(profile, params, prior, t0, m_max=m_max))
    return reports, errors


def score_portfolio(portfolio: Portfolio, params: ModelParams,
                    sector_table: dict[str, SectorPrior], t0: float,
                    workers: int = 1,
                    m_max: float = DEFAULT_M_MAX) -> ScoringResult:
    """Score every profile; order-preserving and worker-count independent.

    Scoring is a pure per-organization function, so the portfolio is split
    into contiguous chunks whose results concatenate back in order; the
    output is bit-identical for any worker count.
    """
    profiles = portfolio.profiles
    if workers < 1:
        workers = 1
    if workers == 1 or len(profiles) < 2 * workers:
        chunks = [(profiles, 0)]
    else:
        bounds = np.linspace(0, len(profiles), workers + 1).astype(int)
        chunks = [(profiles[bounds[i]:bounds[i + 1]], int(bounds[i]))
                  for i in range(workers)]

    if len(chunks) == 1:
        parts = [_score_chunk(chunks[0][0], params, sector_table, t0, m_max, chunks[0][1])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_score_chunk, chunk, params, sector_table,
                                   t0, m_max, offset)
                       for chunk, offset in chunks]
            parts = [f.result() for f in futures]

    reports = [r for part, _ in parts for r in part]
    errors = [e for _, part in parts for e in part]

    summary: dict = {"n_profiles": len(profiles), "n_scored": len(reports),
                     "n_failed": len(errors)}
    if reports:
        scores = np.array([r.ieq for r in reports])
        summary["ieq_quantiles"] = {f"{q:.2f}": float(np.quantile(scores, q))
                                    for q in QUANTILE_LEVELS}
        summary["ieq_mean"] = float(np.mean(scores))
        summary["ieq_sd"] = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
        summary["floored_counts"] = {
            "h": sum(r.floored.h for r in reports),
            "v": sum(r.floored.v for r in reports),
            "e": sum(r.floored.e for r in reports)}
        summary["clipped_count"] = sum(r.clipped for r in reports)
        try:
            summary["spearman_v_e"] = spearman(portfolio.column("V"),
                                               portfolio.column("E"))
        except UndefinedCorrelationError:
            summary["spearman_v_e"] = None
    return ScoringResult(reports=reports, errors=errors, summary=summary)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def persist_portfolio(portfolio: Portfolio, reports: list[ScoreReport] | None,
                      path: str | Path, params: ModelParams | None = None,
                      t0: float | None = None,
                      created_at: str | None = None) -> None:
    """Write header + one JSON record per organization.

    Reports are matched to profiles by org_id; organizations without a
    report get report: null.
    """
    by_id = {r.org_id: r for r in (reports or [])}
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "hndlx-portfolio",
        "provenance": portfolio.provenance,
        "spec_or_source": portfolio.spec_or_source,
        "n_records": len(portfolio.profiles),
        "params": params.to_dict() if params else None,
        "t0": t0,
        "created_at": created_at or datetime.datetime.now(datetime.timezone.utc)
                                            .isoformat(timespec="seconds"),
    }
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for profile in portfolio.profiles:
            report = by_id.get(profile.org_id)
            record = {"profile": profile.to_dict(),
                      "report": report.to_dict() if report else None}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_portfolio(path: str | Path) -> tuple[Portfolio, list[ScoreReport | None]]:
    """Inverse of persist_portfolio; validates version and completeness."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise CorruptFileError(f"{path}: empty file, header record missing")
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: header is not valid JSON ({exc.msg})") from exc
        if not isinstance(header, dict) or header.get("kind") != "hndlx-portfolio":
            raise FormatError(f"{path}: not a portfolio file (bad header record)")
        version = str(header.get("format_version"))
        if version != FORMAT_VERSION:
            raise MigrationNeededError(
                f"{path}: format version {version!r} needs migration to {FORMAT_VERSION!r}")
        expected = int(header.get("n_records", -1))

        profiles: list[OrganizationProfile] = []
        reports: list[ScoreReport | None] = []
        last_good = "header"
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                profile = OrganizationProfile.from_dict(record["profile"])
                report = (ScoreReport.from_dict(record["report"])
                          if record.get("report") is not None else None)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorruptFileError(
                    f"{path}: record at line {line_no} unreadable ({exc}); "
                    f"last good record: {last_good}") from exc
            profiles.append(profile)
            reports.append(report)
            last_good = f"line {line_no} (org_id={profile.org_id})"

    if expected >= 0 and len(profiles) != expected:
        raise CorruptFileError(
            f"{path}: header promises {expected} records, found {len(profiles)}; "
            f"last good record: {last_good}")

    portfolio = Portfolio(profiles=tuple(profiles),
                          provenance=str(header.get("provenance", "ingested")),
                          spec_or_source=header.get("spec_or_source"))
    return portfolio, reports

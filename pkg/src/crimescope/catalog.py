"""Core data model: crime records, catalogs, time slicing and the count matrix.

A catalog is an immutable, timestamp-sorted collection of geo-referenced
events. All aggregation modules work off the columnar numpy views built once
at construction time, so concurrent reads are safe without locking.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import IngestError, FilterError

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M"

# Reject-rate above which ingestion aborts instead of reporting.
MAX_REJECT_FRACTION = 0.10

PERIOD_NAMES = ("night", "morning", "afternoon", "evening")  # 6-hour quarters


def normalize_type(raw: str) -> str:
    """Crime types are compared case-insensitively and without padding."""
    return raw.strip().lower()


@dataclass(frozen=True)
class CrimeRecord:
    site_id: str
    crime_type: str
    timestamp: datetime


@dataclass(frozen=True)
class TimeSlicing:
    """Ordered, contiguous [start, end) calendar intervals covering a date range.

    Month slices are whole calendar months and day slices whole calendar days,
    regardless of where the data range starts within them.
    """

    granularity: str  # "month" | "day"
    slices: tuple  # tuple of (datetime, datetime)

    def __post_init__(self):
        if self.granularity not in ("month", "day"):
            raise ValueError(f"unknown granularity {self.granularity!r}")

    def __len__(self):
        return len(self.slices)

    @classmethod
    def from_range(cls, granularity: str, start: datetime, end: datetime) -> "TimeSlicing":
        if end < start:
            raise ValueError("date range end precedes start")
        if granularity == "month":
            slices = []
            y, m = start.year, start.month
            while (y, m) <= (end.year, end.month):
                nxt = (y + 1, 1) if m == 12 else (y, m + 1)
                slices.append((datetime(y, m, 1), datetime(nxt[0], nxt[1], 1)))
                y, m = nxt
        elif granularity == "day":
            slices = []
            d = start.date()
            while d <= end.date():
                nxt = d + timedelta(days=1)
                slices.append((datetime(d.year, d.month, d.day), datetime(nxt.year, nxt.month, nxt.day)))
                d = nxt
        else:
            raise ValueError(f"unknown granularity {granularity!r}")
        return cls(granularity, tuple(slices))

    def labels(self):
        if self.granularity == "month":
            return [s.strftime("%Y-%m") for s, _ in self.slices]
        return [s.strftime("%Y-%m-%d") for s, _ in self.slices]

    def covers(self, start: datetime, end: datetime) -> bool:
        return self.slices[0][0] <= start and end < self.slices[-1][1]

    def assign(self, catalog: "CrimeCatalog") -> np.ndarray:
        """Slice index per record; -1 for records outside the slicing."""
        first = self.slices[0][0]
        if self.granularity == "month":
            idx = (catalog.years - first.year) * 12 + (catalog.months - first.month)
        else:
            idx = catalog.ordinals - first.toordinal()
        idx = idx.astype(np.int64)
        idx[(idx < 0) | (idx >= len(self.slices))] = -1
        return idx


class CrimeCatalog:
    """Immutable, sorted event collection with columnar views for aggregation."""

    def __init__(self, records, date_range=None, type_groups=None, dataset_label="default"):
        records = sorted(records, key=lambda r: r.timestamp)
        self.records = tuple(records)
        if not self.records:
            raise IngestError("empty catalog", code="empty_catalog")
        if date_range is None:
            date_range = (self.records[0].timestamp, self.records[-1].timestamp)
        self.date_range = date_range
        self.type_groups = dict(type_groups or {})
        self.dataset_label = dataset_label

        self.site_ids = tuple(sorted({r.site_id for r in self.records}))
        self.crime_types = tuple(sorted({r.crime_type for r in self.records}))
        site_index = {s: i for i, s in enumerate(self.site_ids)}
        type_index = {t: i for i, t in enumerate(self.crime_types)}

        n = len(self.records)
        self.site_codes = np.empty(n, dtype=np.int64)
        self.type_codes = np.empty(n, dtype=np.int64)
        self.years = np.empty(n, dtype=np.int64)
        self.months = np.empty(n, dtype=np.int64)
        self.ordinals = np.empty(n, dtype=np.int64)
        self.weekdays = np.empty(n, dtype=np.int64)
        self.hours = np.empty(n, dtype=np.int64)
        self.minutes_epoch = np.empty(n, dtype=np.int64)
        for i, r in enumerate(self.records):
            ts = r.timestamp
            self.site_codes[i] = site_index[r.site_id]
            self.type_codes[i] = type_index[r.crime_type]
            self.years[i] = ts.year
            self.months[i] = ts.month
            self.ordinals[i] = ts.toordinal()
            self.weekdays[i] = ts.weekday()
            self.hours[i] = ts.hour
            self.minutes_epoch[i] = ts.toordinal() * 1440 + ts.hour * 60 + ts.minute
        for arr in (self.site_codes, self.type_codes, self.years, self.months,
                    self.ordinals, self.weekdays, self.hours, self.minutes_epoch):
            arr.setflags(write=False)
        self._site_index = site_index
        self._type_index = type_index

    @property
    def record_count(self) -> int:
        return len(self.records)

    def site_code(self, site_id: str) -> int:
        return self._site_index.get(site_id, -1)

    def type_code(self, crime_type: str) -> int:
        return self._type_index.get(normalize_type(crime_type), -1)

    def default_slicing(self, granularity: str = "month") -> TimeSlicing:
        return TimeSlicing.from_range(granularity, *self.date_range)

    def __eq__(self, other):
        return (
            isinstance(other, CrimeCatalog)
            and self.records == other.records
            and self.date_range == other.date_range
            and self.dataset_label == other.dataset_label
        )

    def __repr__(self):
        return (f"CrimeCatalog({self.dataset_label!r}, {self.record_count} records, "
                f"{self.date_range[0]:%Y-%m-%d}..{self.date_range[1]:%Y-%m-%d})")


@dataclass
class IngestionReport:
    accepted: int = 0
    rejected_by_reason: dict = field(default_factory=dict)
    rejected_rows: list = field(default_factory=list)  # (line_no, reason)

    @property
    def rejected(self) -> int:
        return sum(self.rejected_by_reason.values())

    def reject(self, line_no: int, reason: str):
        self.rejected_by_reason[reason] = self.rejected_by_reason.get(reason, 0) + 1
        self.rejected_rows.append((line_no, reason))

    def as_text(self) -> str:
        lines = [
            "ingestion report",
            f"  accepted: {self.accepted}",
            f"  rejected: {self.rejected}",
        ]
        for reason in sorted(self.rejected_by_reason):
            lines.append(f"    {reason}: {self.rejected_by_reason[reason]}")
        if self.rejected_rows:
            lines.append("  first rejected rows (line: reason):")
            for line_no, reason in self.rejected_rows[:20]:
                lines.append(f"    {line_no}: {reason}")
        return "\n".join(lines)


REQUIRED_COLUMNS = ("site_id", "crime_type", "timestamp")


def ingest_records(source, geometry, date_range=None, type_groups=None,
                   dataset_label="default"):
    """Parse a delimited-text stream into a catalog.

    `source` is a text stream or path; `geometry` anything exposing
    ``has_site(site_id)`` (a SiteGeometrySet). Invalid rows are rejected
    per-row with a reason; a malformed header, an empty result or a reject
    rate above 10% abort with IngestError.

    Returns (CrimeCatalog, IngestionReport).
    """
    if isinstance(source, (str, bytes)):
        stream = open(source, "r", encoding="utf-8", newline="")
        close = True
    else:
        stream = source
        close = False
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("missing header row", code="malformed_header")
        header = [h.strip() for h in header]
        if sorted(header) != sorted(REQUIRED_COLUMNS):
            raise IngestError(
                f"malformed header: expected {','.join(REQUIRED_COLUMNS)}, got {','.join(header)}",
                code="malformed_header")
        col = {name: header.index(name) for name in REQUIRED_COLUMNS}

        report = IngestionReport()
        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                report.reject(line_no, "wrong field count")
                continue
            site_id = row[col["site_id"]].strip()
            crime_type = normalize_type(row[col["crime_type"]])
            raw_ts = row[col["timestamp"]].strip()
            if not geometry.has_site(site_id):
                report.reject(line_no, "unknown site")
                continue
            if not crime_type:
                report.reject(line_no, "empty crime type")
                continue
            try:
                ts = datetime.strptime(raw_ts, TIMESTAMP_FORMAT)
            except ValueError:
                report.reject(line_no, "bad timestamp")
                continue
            if date_range is not None and not (date_range[0] <= ts <= date_range[1]):
                report.reject(line_no, "out of range")
                continue
            records.append(CrimeRecord(site_id, crime_type, ts))
            report.accepted += 1
    finally:
        if close:
            stream.close()

    if not records:
        raise IngestError("no valid records in stream", code="empty_catalog")
    total = report.accepted + report.rejected
    if report.rejected > MAX_REJECT_FRACTION * total:
        raise IngestError(
            f"{report.rejected}/{total} rows rejected (> {MAX_REJECT_FRACTION:.0%}); "
            "refusing to build a catalog from this stream",
            code="too_many_rejects")
    catalog = CrimeCatalog(records, date_range=date_range,
                           type_groups=type_groups, dataset_label=dataset_label)
    return catalog, report


def load_type_groups(source) -> dict:
    """Read a `crime_type = group_label` key-value file into a mapping."""
    if isinstance(source, (str, bytes)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    groups = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise IngestError(f"type-group line {line_no} has no '=': {line!r}",
                              code="bad_type_groups")
        key, _, value = line.partition("=")
        groups[normalize_type(key)] = value.strip()
    return groups


def split_by_category(catalog: CrimeCatalog, category_map: dict) -> list:
    """Partition a catalog into per-category sub-catalogs.

    Every crime type present must be mapped; sub-catalogs come back in sorted
    category order and their record counts sum to the original count.
    """
    norm_map = {normalize_type(k): v for k, v in category_map.items()}
    missing = [t for t in catalog.crime_types if t not in norm_map]
    if missing:
        raise FilterError(f"unmapped crime types: {', '.join(sorted(missing))}",
                          code="unmapped_types")
    buckets = {}
    for record in catalog.records:
        buckets.setdefault(norm_map[record.crime_type], []).append(record)
    return [
        CrimeCatalog(buckets[cat], date_range=catalog.date_range,
                     type_groups=catalog.type_groups, dataset_label=cat)
        for cat in sorted(buckets)
    ]


@dataclass(frozen=True)
class CrimeMatrix:
    """Non-negative site x time-slice count matrix with its index maps."""

    X: np.ndarray  # (m, n) int64
    row_sites: tuple
    slicing: TimeSlicing
    type_filter: frozenset | None = None

    def __post_init__(self):
        if self.X.shape != (len(self.row_sites), len(self.slicing)):
            raise ValueError("matrix shape does not match index maps")

    @property
    def m(self):
        return self.X.shape[0]

    @property
    def n(self):
        return self.X.shape[1]


def count_matrix_entries(catalog: CrimeCatalog, slicing: TimeSlicing, sites,
                         type_filter=None, mask=None) -> CrimeMatrix:
    """X[i][j] = number of records at sites[i] in slices[j] passing type_filter.

    `mask` optionally restricts the counted records further (used by the
    filter machinery); it must be a boolean array over catalog records.
    """
    sites = tuple(sites)
    if not sites:
        raise FilterError("site list is empty", code="empty_sites")
    if not slicing.covers(*catalog.date_range):
        raise FilterError("slicing does not cover the catalog date range",
                          code="slicing_gap")

    site_row = np.full(len(catalog.site_ids), -1, dtype=np.int64)
    for row, site in enumerate(sites):
        code = catalog.site_code(site)
        if code >= 0:
            site_row[code] = row
    rows = site_row[catalog.site_codes]
    cols = slicing.assign(catalog)

    keep = (rows >= 0) & (cols >= 0)
    if type_filter is not None:
        wanted = {normalize_type(t) for t in type_filter}
        type_ok = np.array([t in wanted for t in catalog.crime_types], dtype=bool)
        keep &= type_ok[catalog.type_codes]
    if mask is not None:
        keep &= mask

    m, n = len(sites), len(slicing)
    flat = rows[keep] * n + cols[keep]
    X = np.bincount(flat, minlength=m * n).reshape(m, n).astype(np.int64)
    return CrimeMatrix(X, sites, slicing,
                       None if type_filter is None else frozenset(normalize_type(t) for t in type_filter))

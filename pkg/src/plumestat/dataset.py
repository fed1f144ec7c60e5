"""Monitoring-data ingest: CSV parsing, validation, non-detect/NAPL
substitution, and calendar-interval binning.

Input is two CSV files plus optional overlay geometry:

* ``monitoring.csv`` -- WellID, SampleDate (ISO-8601), Constituent, Result,
  Units.  Non-detect results use the ``ND<X`` notation where X is the
  laboratory detection threshold.  Reserved constituent names: ``GW``
  (groundwater elevation) and ``NAPL`` (free-phase thickness), both
  case-sensitive.
* ``wells.csv`` -- WellID, X, Y and an optional Aquifer column.
* ``overlays.json`` -- GeoJSON-style line features in site coordinates.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from pathlib import Path

from .errors import ParseError, ValidationFailed

RESERVED_GW = "GW"
RESERVED_NAPL = "NAPL"

GRANULARITIES = ("month", "quarter", "year")

_ND_RE = re.compile(r"^\s*nd\s*<\s*(\S.*?)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class MonitoringRecord:
    """One sample row.  ``value`` is the raw reported number (the detection
    threshold when ``censored``); ``working`` is the analysis value after
    substitution."""

    well_id: str
    sample_date: date
    constituent: str
    value: float
    censored: bool
    units: str
    working: float = None
    synthetic: bool = False
    row: int = None  # source line number, for diagnostics

    def __post_init__(self):
        if self.working is None:
            object.__setattr__(self, "working", self.value)

    @property
    def is_solute(self):
        return self.constituent not in (RESERVED_GW, RESERVED_NAPL)


@dataclass(frozen=True)
class WellLocation:
    well_id: str
    x: float
    y: float
    aquifer: str = ""


@dataclass(frozen=True)
class SubstitutionPolicy:
    """Non-detect and NAPL handling.  ``nd_fraction`` multiplies the
    detection threshold (0.5 = half the limit, 1.0 = full limit);
    ``napl_substitute`` backfills solutes hidden by free product with the
    site-wide maximum detected value."""

    nd_fraction: float = 0.5
    napl_substitute: bool = False

    def __post_init__(self):
        if self.nd_fraction not in (0.5, 1.0):
            raise ValueError(f"nd_fraction must be 0.5 or 1.0, got {self.nd_fraction}")


@dataclass(frozen=True)
class Interval:
    """Half-open calendar bin [start, end)."""

    start: date
    end: date
    label: str

    def contains(self, d):
        return self.start <= d < self.end

    def midpoint_ordinal(self):
        """Integer day ordinal of the bin midpoint; shared by the trend
        evaluation grid and the time-slice exports so they align exactly."""
        return (self.start.toordinal() + self.end.toordinal()) // 2


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    row: int = None

    def to_dict(self):
        d = {"severity": self.severity, "code": self.code, "message": self.message}
        if self.row is not None:
            d["row"] = self.row
        return d


@dataclass
class Dataset:
    """Validated, immutable-by-convention monitoring dataset."""

    records: list[MonitoringRecord]
    wells: list[WellLocation]
    intervals: list[Interval]
    overlays: list[list[tuple[float, float]]]
    policy: SubstitutionPolicy
    granularity: str = "quarter"
    aquifer: str = None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def solutes(self):
        """Solute names in first-appearance order."""
        seen = []
        for r in self.records:
            if r.is_solute and r.constituent not in seen:
                seen.append(r.constituent)
        return seen

    @property
    def well_ids(self):
        return [w.well_id for w in self.wells]

    def well(self, well_id):
        for w in self.wells:
            if w.well_id == well_id:
                return w
        raise KeyError(well_id)

    def interval_index(self, d):
        for k, iv in enumerate(self.intervals):
            if iv.contains(d):
                return k
        raise ValueError(f"date {d} outside interval span")

    def records_for(self, constituent=None, well_id=None, interval=None):
        out = self.records
        if constituent is not None:
            out = [r for r in out if r.constituent == constituent]
        if well_id is not None:
            out = [r for r in out if r.well_id == well_id]
        if interval is not None:
            iv = self.intervals[interval]
            out = [r for r in out if iv.contains(r.sample_date)]
        return out

    def units_for(self, constituent):
        for r in self.records:
            if r.constituent == constituent:
                return r.units
        return ""


def parse_value(text, row=None):
    """Parse a Result cell into ``(value, censored)``.

    A plain decimal gives ``(v, False)``; the non-detect notation ``ND<X``
    (case-insensitive, internal whitespace tolerated) gives ``(X, True)``.
    """
    if not isinstance(text, str):
        raise ParseError(f"result is not text: {text!r}", row=row, token=text)
    m = _ND_RE.match(text)
    if m:
        token = m.group(1)
        try:
            threshold = float(token)
        except ValueError:
            raise ParseError(
                f"row {row}: malformed non-detect threshold {token!r}", row=row, token=token
            ) from None
        if threshold <= 0:
            raise ParseError(
                f"row {row}: detection threshold must be positive, got {threshold}",
                row=row,
                token=token,
            )
        return threshold, True
    try:
        return float(text), False
    except ValueError:
        raise ParseError(
            f"row {row}: malformed result {text.strip()!r}", row=row, token=text.strip()
        ) from None


def apply_substitution(records, policy):
    """Return a new record list with working values set by ``policy``.

    Censored records get working = nd_fraction * detection threshold.  With
    ``napl_substitute``, every (well, date) that carries a NAPL row gains a
    synthetic record, for each solute absent at that (well, date), at the
    site-wide maximum detected working value of that solute.  Idempotent:
    prior synthetic rows are dropped and working values recomputed from raw.
    """
    base = [r for r in records if not r.synthetic]
    out = []
    for r in base:
        if r.censored:
            out.append(replace(r, working=policy.nd_fraction * r.value))
        else:
            out.append(replace(r, working=r.value))

    diagnostics = []
    if policy.napl_substitute:
        solutes, napl_sites = [], set()
        present = set()
        for r in out:
            if r.constituent == RESERVED_NAPL:
                napl_sites.add((r.well_id, r.sample_date))
            elif r.is_solute:
                if r.constituent not in solutes:
                    solutes.append(r.constituent)
                present.add((r.well_id, r.sample_date, r.constituent))

        site_max = {}
        units = {}
        for s in solutes:
            detected = [r.working for r in out if r.constituent == s and not r.censored]
            if detected:
                site_max[s] = max(detected)
                units[s] = next(r.units for r in out if r.constituent == s)
            else:
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        "NAPL_NO_DETECTS",
                        f"solute {s!r} has no detected values site-wide; "
                        "NAPL substitution skipped for it",
                    )
                )

        for well_id, sample_date in sorted(napl_sites, key=lambda p: (p[0], p[1])):
            for s in solutes:
                if s not in site_max or (well_id, sample_date, s) in present:
                    continue
                out.append(
                    MonitoringRecord(
                        well_id=well_id,
                        sample_date=sample_date,
                        constituent=s,
                        value=site_max[s],
                        censored=False,
                        units=units[s],
                        working=site_max[s],
                        synthetic=True,
                    )
                )
    return out, diagnostics


def _quarter_start(d):
    return date(d.year, 3 * ((d.month - 1) // 3) + 1, 1)


def _month_add(d, n):
    m = d.month - 1 + n
    return date(d.year + m // 12, m % 12 + 1, 1)


def bin_intervals(dates, granularity="quarter"):
    """Consecutive calendar bins covering [min(dates), max(dates)].

    Empty bins in the interior are retained so time-stepping is uniform.
    """
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}")
    if not dates:
        raise ValueError("no dates to bin")
    lo, hi = min(dates), max(dates)
    out = []
    if granularity == "year":
        for year in range(lo.year, hi.year + 1):
            out.append(Interval(date(year, 1, 1), date(year + 1, 1, 1), str(year)))
    elif granularity == "quarter":
        start = _quarter_start(lo)
        while start <= hi:
            end = _month_add(start, 3)
            q = (start.month - 1) // 3 + 1
            out.append(Interval(start, end, f"{start.year}Q{q}"))
            start = end
    else:  # month
        start = date(lo.year, lo.month, 1)
        while start <= hi:
            end = _month_add(start, 1)
            out.append(Interval(start, end, f"{start.year}-{start.month:02d}"))
            start = end
    return out


def _read_csv(text, required, source):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ParseError(f"{source}: empty file")
    names = {n.strip(): n for n in reader.fieldnames}
    missing = [c for c in required if c not in names]
    if missing:
        raise ParseError(f"{source}: missing column(s) {', '.join(missing)}")
    rows = []
    for i, raw in enumerate(reader, start=2):  # header is line 1
        rows.append((i, {k.strip(): (v or "").strip() for k, v in raw.items() if k}))
    return names, rows


def parse_monitoring_csv(text):
    """Parse monitoring.csv text into records (raw values, no substitution)."""
    _, rows = _read_csv(text, ["WellID", "SampleDate", "Constituent", "Result", "Units"],
                        "monitoring.csv")
    records = []
    for line, row in rows:
        if not any(row.values()):
            continue
        well = row["WellID"]
        if not well:
            raise ParseError(f"monitoring.csv row {line}: empty WellID", row=line)
        try:
            sample_date = date.fromisoformat(row["SampleDate"])
        except ValueError:
            raise ParseError(
                f"monitoring.csv row {line}: bad SampleDate {row['SampleDate']!r} "
                "(expected ISO-8601)",
                row=line,
                token=row["SampleDate"],
            ) from None
        constituent = row["Constituent"]
        if not constituent:
            raise ParseError(f"monitoring.csv row {line}: empty Constituent", row=line)
        value, censored = parse_value(row["Result"], row=line)
        if censored and constituent in (RESERVED_GW, RESERVED_NAPL):
            raise ParseError(
                f"monitoring.csv row {line}: {constituent} cannot be non-detect", row=line
            )
        records.append(
            MonitoringRecord(
                well_id=well,
                sample_date=sample_date,
                constituent=constituent,
                value=value,
                censored=censored,
                units=row["Units"],
                row=line,
            )
        )
    return records


def parse_wells_csv(text):
    """Parse wells.csv text into WellLocation rows."""
    names, rows = _read_csv(text, ["WellID", "X", "Y"], "wells.csv")
    has_aquifer = "Aquifer" in names
    wells = []
    for line, row in rows:
        if not any(row.values()):
            continue
        try:
            x, y = float(row["X"]), float(row["Y"])
        except ValueError:
            raise ParseError(
                f"wells.csv row {line}: non-numeric coordinate", row=line
            ) from None
        if not (abs(x) < float("inf") and abs(y) < float("inf")):
            raise ParseError(f"wells.csv row {line}: non-finite coordinate", row=line)
        wells.append(
            WellLocation(row["WellID"], x, y, row.get("Aquifer", "") if has_aquifer else "")
        )
    return wells


def parse_overlays_json(text):
    """Parse overlay polylines: GeoJSON FeatureCollection of LineStrings, or a
    bare list of coordinate lists."""
    data = json.loads(text)
    lines = []
    if isinstance(data, dict) and data.get("type") == "FeatureCollection":
        for feat in data.get("features", []):
            geom = feat.get("geometry", {})
            if geom.get("type") == "LineString":
                lines.append([(float(x), float(y)) for x, y in geom["coordinates"]])
            elif geom.get("type") == "MultiLineString":
                for part in geom["coordinates"]:
                    lines.append([(float(x), float(y)) for x, y in part])
    elif isinstance(data, list):
        for part in data:
            lines.append([(float(x), float(y)) for x, y in part])
    else:
        raise ParseError("overlays.json: expected FeatureCollection or list of polylines")
    return lines


def validate(records, wells, today=None):
    """Run the standard input checks.

    Returns ``(diagnostics, clean_records)`` where clean_records has
    duplicate (well, date, constituent) rows collapsed to the last
    occurrence.  Error-severity diagnostics block analysis.
    """
    today = today or date.today()
    diagnostics = []
    known = {w.well_id for w in wells}

    seen_wells = set()
    for w in wells:
        if w.well_id in seen_wells:
            diagnostics.append(
                Diagnostic("error", "DUPLICATE_WELL", f"well {w.well_id!r} listed twice")
            )
        seen_wells.add(w.well_id)

    units = {}
    last = {}
    for r in records:
        if r.well_id not in known:
            diagnostics.append(
                Diagnostic(
                    "error",
                    "UNKNOWN_WELL",
                    f"row {r.row}: well {r.well_id!r} missing from wells.csv",
                    row=r.row,
                )
            )
        if r.value < 0:
            diagnostics.append(
                Diagnostic(
                    "error",
                    "NEGATIVE_VALUE",
                    f"row {r.row}: negative result {r.value} for {r.constituent}",
                    row=r.row,
                )
            )
        if r.sample_date > today:
            diagnostics.append(
                Diagnostic(
                    "warning",
                    "FUTURE_DATE",
                    f"row {r.row}: sample date {r.sample_date} is in the future",
                    row=r.row,
                )
            )
        canon = units.setdefault(r.constituent, r.units)
        if r.units != canon:
            diagnostics.append(
                Diagnostic(
                    "error",
                    "MIXED_UNITS",
                    f"row {r.row}: {r.constituent} reported in {r.units!r} but "
                    f"previously in {canon!r} (no automatic conversion)",
                    row=r.row,
                )
            )
        key = (r.well_id, r.sample_date, r.constituent)
        if key in last:
            diagnostics.append(
                Diagnostic(
                    "warning",
                    "DUPLICATE_ROW",
                    f"row {r.row}: duplicate of (well={r.well_id}, date={r.sample_date}, "
                    f"constituent={r.constituent}); keeping the last occurrence",
                    row=r.row,
                )
            )
        last[key] = r

    sampled = {r.well_id for r in records}
    for w in wells:
        if w.well_id not in sampled:
            diagnostics.append(
                Diagnostic(
                    "warning", "ORPHAN_WELL", f"well {w.well_id!r} has no samples"
                )
            )

    # Keep input order, with each duplicate key collapsed onto its last
    # occurrence, so constituent/column ordering follows the source file.
    keep = {id(r) for r in last.values()}
    clean = [r for r in records if id(r) in keep]
    return diagnostics, clean


def load_dataset(
    monitoring_text,
    wells_text,
    overlays_text=None,
    policy=None,
    granularity="quarter",
    aquifer=None,
    today=None,
    strict=True,
):
    """Parse, validate, substitute, and bin a full dataset.

    With ``strict`` (default), error-severity diagnostics raise
    ``ValidationFailed``; otherwise they are kept on the dataset.
    """
    policy = policy or SubstitutionPolicy()
    records = parse_monitoring_csv(monitoring_text)
    wells = parse_wells_csv(wells_text)
    overlays = parse_overlays_json(overlays_text) if overlays_text else []

    if aquifer is not None:
        keep = {w.well_id for w in wells if w.aquifer == aquifer}
        if not keep:
            raise ParseError(f"no wells in aquifer {aquifer!r}")
        wells = [w for w in wells if w.well_id in keep]
        records = [r for r in records if r.well_id in keep]

    diagnostics, clean = validate(records, wells, today=today)
    if strict and any(d.severity == "error" for d in diagnostics):
        raise ValidationFailed(diagnostics)

    substituted, sub_diags = apply_substitution(clean, policy)
    diagnostics.extend(sub_diags)

    if not substituted:
        raise ParseError("monitoring.csv contains no data rows")
    intervals = bin_intervals([r.sample_date for r in substituted], granularity)

    return Dataset(
        records=substituted,
        wells=wells,
        intervals=intervals,
        overlays=overlays,
        policy=policy,
        granularity=granularity,
        aquifer=aquifer,
        diagnostics=diagnostics,
    )


def load_dataset_dir(path, **kwargs):
    """Load monitoring.csv + wells.csv (+ overlays.json) from a directory."""
    path = Path(path)
    monitoring = (path / "monitoring.csv").read_text(encoding="utf-8")
    wells = (path / "wells.csv").read_text(encoding="utf-8")
    overlays_path = path / "overlays.json"
    overlays = overlays_path.read_text(encoding="utf-8") if overlays_path.exists() else None
    return load_dataset(monitoring, wells, overlays, **kwargs)


def _format_number(v):
    # repr round-trips doubles exactly; ints print bare for readability
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def monitoring_to_csv(records):
    """Canonical monitoring.csv text.  Synthetic rows are derived data and
    omitted; censored rows round-trip through the ND<X notation."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["WellID", "SampleDate", "Constituent", "Result", "Units"])
    for r in records:
        if r.synthetic:
            continue
        result = f"ND<{_format_number(r.value)}" if r.censored else _format_number(r.value)
        w.writerow([r.well_id, r.sample_date.isoformat(), r.constituent, result, r.units])
    return buf.getvalue()


def wells_to_csv(wells):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    has_aquifer = any(well.aquifer for well in wells)
    header = ["WellID", "X", "Y"] + (["Aquifer"] if has_aquifer else [])
    w.writerow(header)
    for well in wells:
        row = [well.well_id, _format_number(well.x), _format_number(well.y)]
        if has_aquifer:
            row.append(well.aquifer)
        w.writerow(row)
    return buf.getvalue()


def overlays_to_json(overlays):
    return json.dumps(
        {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {},
                    "geometry": {"type": "LineString",
                                 "coordinates": [[x, y] for x, y in line]},
                }
                for line in overlays
            ],
        }
    )


def save_dataset_dir(dataset, path):
    """Write the canonical CSV form of a dataset to a directory."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / "monitoring.csv").write_text(monitoring_to_csv(dataset.records), encoding="utf-8")
    (path / "wells.csv").write_text(wells_to_csv(dataset.wells), encoding="utf-8")
    if dataset.overlays:
        (path / "overlays.json").write_text(overlays_to_json(dataset.overlays), encoding="utf-8")

"""AIS record and port registry parsing.

Input is a UTF-8 line-oriented file: either delimited text with a header or
one JSON object per line.  A column-mapping schema names the fields holding
the vessel identifiers, timestamp, coordinates, and vessel type.  Malformed
rows are counted and rejected, never silently coerced.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Iterator, TextIO


class IngestError(ValueError):
    pass


class VesselType(Enum):
    CARGO = "cargo"
    TANKER = "tanker"
    PASSENGER = "passenger"
    OTHER = "other"
    UNKNOWN = "unknown"


_TYPE_NAMES = {t.value: t for t in VesselType}
# categories that are recognizably something other than cargo/tanker/passenger
_OTHER_NAMES = {
    "fishing", "towing", "tug", "pilot", "sar", "dredging", "diving",
    "military", "sailing", "pleasure", "hsc", "law", "medical", "wig",
    "port tender", "anti-pollution",
}


def parse_vessel_type(raw: str | None) -> VesselType:
    """Normalize an AIS ship-type field: numeric ITU codes (60s passenger,
    70s cargo, 80s tanker) or the category name; unrecognized -> unknown."""
    if raw is None:
        return VesselType.UNKNOWN
    text = raw.strip().lower()
    if not text:
        return VesselType.UNKNOWN
    if text in _TYPE_NAMES:
        return _TYPE_NAMES[text]
    if text in _OTHER_NAMES:
        return VesselType.OTHER
    try:
        code = int(float(text))
    except ValueError:
        return VesselType.UNKNOWN
    if 70 <= code <= 79:
        return VesselType.CARGO
    if 80 <= code <= 89:
        return VesselType.TANKER
    if 60 <= code <= 69:
        return VesselType.PASSENGER
    if 0 < code < 100:
        return VesselType.OTHER
    return VesselType.UNKNOWN


def parse_timestamp(text: str, fmt: str) -> int:
    """UTC epoch seconds from RFC 3339 text or integer epoch seconds."""
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    if fmt == "epoch":
        return int(text)
    if fmt == "rfc3339":
        # fromisoformat in 3.10 does not accept a trailing Z
        iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
        dt = datetime.fromisoformat(iso)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"unknown timestamp format {fmt!r}")


def format_timestamp(epoch: int) -> str:
    dt = datetime.fromtimestamp(epoch, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(slots=True)
class AisRecord:
    mmsi: str
    imo: str
    callsign: str
    ts: int  # UTC epoch seconds
    lat: float
    lon: float
    vessel_type: VesselType


@dataclass(frozen=True, slots=True)
class VesselId:
    """A vessel is unique only when all three identifiers are present."""

    mmsi: str
    imo: str
    callsign: str


def resolve_vessel_id(record: AisRecord) -> VesselId | None:
    """VesselId when mmsi, imo, and callsign are all non-empty, else None."""
    if record.mmsi and record.imo and record.callsign:
        return VesselId(record.mmsi, record.imo, record.callsign)
    return None


@dataclass(slots=True)
class PortRecord:
    port_id: int
    name: str
    country: str
    lat: float
    lon: float
    harbor_size: str | None  # L, M, S, V or None when missing
    raw_features: dict[str, str] = field(default_factory=dict)


@dataclass
class RecordSchema:
    """Column mapping for the AIS source."""

    mmsi: str = "mmsi"
    imo: str = "imo"
    callsign: str = "callsign"
    timestamp: str = "timestamp"
    lat: str = "lat"
    lon: str = "lon"
    vessel_type: str = "vessel_type"
    timestamp_format: str = "rfc3339"  # or "epoch"
    format: str = "delimited"  # or "jsonl"
    delimiter: str = ","

    def required_columns(self) -> list[str]:
        return [self.mmsi, self.imo, self.callsign, self.timestamp,
                self.lat, self.lon, self.vessel_type]


REJECT_BAD_COORDINATE = "coordinate out of range"
REJECT_BAD_TIMESTAMP = "bad timestamp"
REJECT_MISSING_COLUMN = "missing column"


@dataclass
class RejectReport:
    accepted: int = 0
    reasons: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str) -> None:
        self.reasons[reason] = self.reasons.get(reason, 0) + 1

    @property
    def rejected(self) -> int:
        return sum(self.reasons.values())

    def merge(self, other: "RejectReport") -> "RejectReport":
        merged = RejectReport(accepted=self.accepted + other.accepted,
                              reasons=dict(self.reasons))
        for reason, count in other.reasons.items():
            merged.reasons[reason] = merged.reasons.get(reason, 0) + count
        return merged


def _iter_rows(source: Iterable[str], schema: RecordSchema) -> Iterator[dict]:
    if schema.format == "jsonl":
        for line in source:
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                yield {}
    elif schema.format == "delimited":
        reader = csv.DictReader(source, delimiter=schema.delimiter)
        if reader.fieldnames is None:
            raise IngestError("AIS source is empty: no header row")
        yield from reader
    else:
        raise IngestError(f"unknown source format {schema.format!r}")


def parse_ais_stream(source: Iterable[str], schema: RecordSchema) -> tuple[list[AisRecord], RejectReport]:
    """Parse decoded AIS rows; bad rows are rejected and counted by reason.

    Missing identity fields do NOT reject a row here; identity is enforced
    by resolve_vessel_id downstream.
    """
    records: list[AisRecord] = []
    report = RejectReport()
    for row in _iter_rows(source, schema):
        values = {}
        missing = False
        for col in schema.required_columns():
            if col not in row or row[col] is None:
                missing = True
                break
            values[col] = str(row[col])
        if missing:
            report.reject(REJECT_MISSING_COLUMN)
            continue
        try:
            ts = parse_timestamp(values[schema.timestamp], schema.timestamp_format)
        except (ValueError, OverflowError):
            report.reject(REJECT_BAD_TIMESTAMP)
            continue
        try:
            lat = float(values[schema.lat])
            lon = float(values[schema.lon])
        except ValueError:
            report.reject(REJECT_BAD_COORDINATE)
            continue
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            report.reject(REJECT_BAD_COORDINATE)
            continue
        records.append(AisRecord(
            mmsi=values[schema.mmsi].strip(),
            imo=values[schema.imo].strip(),
            callsign=values[schema.callsign].strip(),
            ts=ts,
            lat=lat,
            lon=lon,
            vessel_type=parse_vessel_type(values[schema.vessel_type]),
        ))
        report.accepted += 1
    return records, report


def parse_ais_file(path, schema: RecordSchema) -> tuple[list[AisRecord], RejectReport]:
    try:
        fh: TextIO = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read AIS source {path}: {exc}") from exc
    with fh:
        return parse_ais_stream(fh, schema)


PORT_REGISTRY_COLUMNS = ("port_id", "name", "country", "lat", "lon", "harbor_size")


def load_port_registry(path) -> list[PortRecord]:
    """Delimited registry with header; any extra columns become raw features
    (empty cells mean missing)."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read port registry {path}: {exc}") from exc
    ports: list[PortRecord] = []
    seen: set[int] = set()
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError("port registry is empty")
        for col in PORT_REGISTRY_COLUMNS:
            if col not in reader.fieldnames:
                raise IngestError(f"port registry missing column {col!r}")
        feature_cols = [c for c in reader.fieldnames if c not in PORT_REGISTRY_COLUMNS]
        for row in reader:
            try:
                pid = int(row["port_id"])
                lat = float(row["lat"])
                lon = float(row["lon"])
            except (TypeError, ValueError) as exc:
                raise IngestError(f"malformed registry row {row!r}") from exc
            if pid in seen:
                raise IngestError(f"duplicate port id {pid}")
            seen.add(pid)
            size = (row.get("harbor_size") or "").strip().upper() or None
            if size is not None and size not in ("L", "M", "S", "V"):
                raise IngestError(f"port {pid}: bad harbor size code {size!r}")
            features = {}
            for col in feature_cols:
                cell = (row.get(col) or "").strip()
                if cell:
                    features[col] = cell
            ports.append(PortRecord(
                port_id=pid,
                name=(row.get("name") or "").strip(),
                country=(row.get("country") or "").strip(),
                lat=lat,
                lon=lon,
                harbor_size=size,
                raw_features=features,
            ))
    if not ports:
        raise IngestError("port registry has no rows")
    return ports


__all__ = [
    "AisRecord",
    "IngestError",
    "PortRecord",
    "RecordSchema",
    "RejectReport",
    "REJECT_BAD_COORDINATE",
    "REJECT_BAD_TIMESTAMP",
    "REJECT_MISSING_COLUMN",
    "VesselId",
    "VesselType",
    "format_timestamp",
    "load_port_registry",
    "parse_ais_file",
    "parse_ais_stream",
    "parse_timestamp",
    "parse_vessel_type",
    "resolve_vessel_id",
]

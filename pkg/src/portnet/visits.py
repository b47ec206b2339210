"""Port visits and voyages from time-ordered, port-tagged vessel records.

A visit is a maximal run of consecutive records at the same port; records
outside every geofence are dropped before run-collapsing, so a gap at sea
does not split a visit unless a different port intervenes.  Voyages chain
consecutive visits of one vessel.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from portnet.ingest import VesselId, VesselType, format_timestamp, parse_timestamp


class VisitError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class PortVisit:
    vessel: VesselId
    port_id: int
    arrival: int  # epoch seconds of the first record of the run
    departure: int  # epoch seconds of the last record of the run

    def __post_init__(self):
        if self.arrival > self.departure:
            raise VisitError(f"visit arrival after departure at port {self.port_id}")


@dataclass(frozen=True, slots=True)
class Voyage:
    vessel: VesselId
    origin: int
    destination: int
    depart: int
    arrive: int

    def __post_init__(self):
        if self.origin == self.destination:
            raise VisitError("voyage origin equals destination")
        if self.depart >= self.arrive:
            raise VisitError("voyage departure not before arrival")


def extract_visits(
    vessel: VesselId,
    records: Sequence[tuple[int, int | None]],
    min_visit_messages: int = 1,
) -> list[PortVisit]:
    """Collapse maximal same-port runs into visits.

    ``records`` are (epoch_seconds, port_id_or_None) pairs of ONE vessel,
    sorted ascending by time (ties keep input order); unsorted input is an
    error.  Unassigned records are skipped and do not break a run.
    """
    last_ts = None
    for ts, _ in records:
        if last_ts is not None and ts < last_ts:
            raise VisitError("records not sorted by timestamp")
        last_ts = ts
    tagged = [(ts, pid) for ts, pid in records if pid is not None]
    visits: list[PortVisit] = []
    run_port = None
    run_start = run_end = 0
    run_count = 0

    def close_run():
        if run_port is not None and run_count >= min_visit_messages:
            visits.append(PortVisit(vessel, run_port, run_start, run_end))

    for ts, pid in tagged:
        if pid == run_port:
            run_end = ts
            run_count += 1
        else:
            close_run()
            run_port, run_start, run_end, run_count = pid, ts, ts, 1
    close_run()
    return visits


def modal_vessel_type(types: Iterable[VesselType]) -> VesselType:
    """Most frequent type over a vessel's records; ties -> unknown."""
    counts = Counter(types)
    if not counts:
        return VesselType.UNKNOWN
    ranked = counts.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return VesselType.UNKNOWN
    return ranked[0][0]


def filter_by_vessel_type(
    visits: Iterable[PortVisit],
    type_of: dict[VesselId, VesselType],
    keep: set[VesselType],
) -> tuple[list[PortVisit], Counter]:
    """Visits whose vessel's type is in ``keep``; excluded types counted."""
    kept: list[PortVisit] = []
    excluded: Counter = Counter()
    for visit in visits:
        vtype = type_of.get(visit.vessel, VesselType.UNKNOWN)
        if vtype in keep:
            kept.append(visit)
        else:
            excluded[vtype.value] += 1
    return kept, excluded


def filter_cargo(
    visits: Iterable[PortVisit], type_of: dict[VesselId, VesselType]
) -> tuple[list[PortVisit], Counter]:
    """Cargo-vessel visits only; unknown types are excluded and counted."""
    return filter_by_vessel_type(visits, type_of, {VesselType.CARGO})


def derive_voyages(visits: Sequence[PortVisit]) -> list[Voyage]:
    """Chain consecutive visits of one vessel into voyages (n visits ->
    n-1 voyages); degenerate zero-duration transitions are dropped."""
    voyages: list[Voyage] = []
    for prev, nxt in zip(visits, visits[1:]):
        try:
            voyages.append(Voyage(
                vessel=prev.vessel,
                origin=prev.port_id,
                destination=nxt.port_id,
                depart=prev.departure,
                arrive=nxt.arrival,
            ))
        except VisitError:
            # same-timestamp boundary or same-port pair: no usable voyage
            continue
    return voyages


VISITS_HEADER = ["mmsi", "imo", "callsign", "port_id", "arrival", "departure"]
VOYAGES_HEADER = ["mmsi", "imo", "callsign", "origin", "destination", "depart", "arrive"]


def write_visits(visits: Iterable[PortVisit], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(VISITS_HEADER)
        for v in visits:
            writer.writerow([
                v.vessel.mmsi, v.vessel.imo, v.vessel.callsign, v.port_id,
                format_timestamp(v.arrival), format_timestamp(v.departure),
            ])


def read_visits(path) -> list[PortVisit]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(PortVisit(
                vessel=VesselId(row["mmsi"], row["imo"], row["callsign"]),
                port_id=int(row["port_id"]),
                arrival=parse_timestamp(row["arrival"], "rfc3339"),
                departure=parse_timestamp(row["departure"], "rfc3339"),
            ))
    return out


def write_voyages(voyages: Iterable[Voyage], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(VOYAGES_HEADER)
        for v in voyages:
            writer.writerow([
                v.vessel.mmsi, v.vessel.imo, v.vessel.callsign,
                v.origin, v.destination,
                format_timestamp(v.depart), format_timestamp(v.arrive),
            ])


def read_voyages(path) -> list[Voyage]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(Voyage(
                vessel=VesselId(row["mmsi"], row["imo"], row["callsign"]),
                origin=int(row["origin"]),
                destination=int(row["destination"]),
                depart=parse_timestamp(row["depart"], "rfc3339"),
                arrive=parse_timestamp(row["arrive"], "rfc3339"),
            ))
    return out


__all__ = [
    "PortVisit",
    "VISITS_HEADER",
    "VOYAGES_HEADER",
    "VisitError",
    "Voyage",
    "derive_voyages",
    "extract_visits",
    "filter_by_vessel_type",
    "filter_cargo",
    "modal_vessel_type",
    "read_visits",
    "read_voyages",
    "write_visits",
    "write_voyages",
]

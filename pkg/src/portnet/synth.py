"""Synthetic worlds: a scripted toy world for end-to-end determinism checks
and a planted-signal world for classifier and attribution sanity checks.

The toy world is built from explicit per-vessel itineraries, so the expected
visits, voyages, and edge weights are known by construction; the generated
AIS file plants a fixed set of malformed rows, one identity-free vessel,
non-cargo vessels, and an overlapping port pair that must be absorbed.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from portnet.centrality import CentralityParams, CentralityTable, compute_centralities
from portnet.ingest import VesselId, format_timestamp
from portnet.network import build_network, largest_scc

TOY_SEED = 7
TOY_START = 1514764800  # 2018-01-01T00:00:00Z

# 16 ordinal depth letters (no I), deepest last
DEPTH_LETTERS = "ABCDEFGHJKLMNOPQ"

# cargo itineraries: port sequences per vessel; the pair (101 -> 102) appears
# exactly three times and (102 -> 101) once across all scripts
CARGO_SCRIPTS = {
    "CV01": [101, 102, 103, 104, 101, 102],
    "CV02": [102, 101, 105, 106, 102],
    "CV03": [101, 102, 107, 108, 109, 101],
    "CV04": [110, 111, 112, 113, 110, 114],
    "CV05": [114, 115, 116, 110, 117, 114],
    "CV06": [105, 118, 119, 120, 105],
    "CV07": [121, 122, 123, 124, 121],
    "CV08": [117, 121, 125, 126, 117],
    "CV09": [126, 127, 128, 129, 130, 126],
    "CV10": [103, 140, 139, 131],  # 140 is absorbed by 139: one collapsed visit
    "CV11": [132, 101],
    "CV12": [104, 110, 128, 104],
}
TANKER_SCRIPT = ("TV01", [133, 134, 133])
PASSENGER_SCRIPT = ("PV01", [135, 136])
MIXED_TYPE_SCRIPT = ("XV01", [137, 138])  # type records tie -> modal unknown
NO_IMO_SCRIPT = ("NV01", [101, 103])  # lacks an IMO number: excluded

# the strongly connected cargo core
TOY_SCC_PORTS = list(range(101, 131))


def _toy_port_rows(rng: np.random.Generator) -> list[dict]:
    rows = []
    sizes = ["L", "M", "S", "V"]
    countries = ["AA", "BB", "CC", "DD", "EE"]
    shelters = ["E", "G", "F", "P"]
    for i, pid in enumerate(range(101, 141)):
        lat = -15.0 + 5.0 * (i // 8)
        lon = 10.0 + 5.0 * (i % 8)
        size = sizes[i % 4]
        if pid == 139:
            size = "L"
        if pid == 140:
            # 2 km east of port 139, inside its circle
            prev = rows[-1]
            lat = float(prev["lat"])
            lon = float(prev["lon"]) + 0.018
            size = "S"
        row = {
            "port_id": pid,
            "name": f"PORT {pid}",
            "country": countries[i % 5],
            "lat": round(lat, 6),
            "lon": round(lon, 6),
            "harbor_size": size,
            "region_ref": f"R{i:03d}",
            "depth_code": DEPTH_LETTERS[int(rng.integers(0, 16))]
            if rng.random() > 0.10 else "",
            "shelter": shelters[int(rng.integers(0, 4))]
            if rng.random() > 0.15 else "",
            "pilotage": "Y" if rng.random() < 0.6 else "N",
            "fax": ("Y" if rng.random() < 0.5 else "N")
            if rng.random() > 0.66 else "",
            "provisions": ("Y" if rng.random() < 0.7 else "N")
            if rng.random() > 0.20 else "",
            "med_facilities": ("Y" if rng.random() < 0.5 else "N")
            if rng.random() > 0.30 else "",
            "tugs": ("Y" if rng.random() < 0.4 else "N")
            if rng.random() > 0.15 else "",
        }
        rows.append(row)
    return rows


def _vessel_identity(key: str) -> tuple[str, str, str]:
    num = int(key[2:])
    prefix = {"C": "2", "T": "3", "P": "4", "X": "5", "N": "6"}[key[0]]
    mmsi = f"{prefix}{num:08d}"
    imo = "" if key.startswith("NV") else f"9{num:06d}"
    callsign = f"{key}CALL"
    return mmsi, imo, callsign


def _script_records(
    key: str, script: list[int], vessel_type: str, port_pos: dict[int, tuple[float, float]],
    rng: np.random.Generator, start: int, type_sequence: list[str] | None = None,
) -> list[list]:
    mmsi, imo, callsign = _vessel_identity(key)
    rows = []
    t = start
    type_iter = iter(type_sequence or [])
    for k, pid in enumerate(script):
        lat0, lon0 = port_pos[pid]
        n_msgs = 2 + (k % 3)
        for _ in range(n_msgs):
            lat = lat0 + float(rng.uniform(-0.008, 0.008))
            lon = lon0 + float(rng.uniform(-0.008, 0.008))
            vt = next(type_iter, vessel_type) if type_sequence else vessel_type
            rows.append([mmsi, imo, callsign, format_timestamp(t),
                         round(lat, 6), round(lon, 6), vt])
            t += int(rng.integers(1800, 7200))
        if k + 1 < len(script):
            # one transit ping between ports, well away from every circle
            nlat, nlon = port_pos[script[k + 1]]
            mid_lat = (lat0 + nlat) / 2.0 + 1.7
            mid_lon = (lon0 + nlon) / 2.0 + 2.3
            vt = next(type_iter, vessel_type) if type_sequence else vessel_type
            rows.append([mmsi, imo, callsign, format_timestamp(t),
                         round(mid_lat, 6), round(mid_lon, 6), vt])
            t += int(rng.integers(3600, 10800))
    return rows


def make_toy_world(out_dir) -> None:
    """Write ports.csv, ais.csv, and run.cfg for the bundled toy world."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(TOY_SEED)
    port_rows = _toy_port_rows(rng)
    port_pos = {r["port_id"]: (float(r["lat"]), float(r["lon"])) for r in port_rows}

    header = ["port_id", "name", "country", "lat", "lon", "harbor_size",
              "region_ref", "depth_code", "shelter", "pilotage", "fax",
              "provisions", "med_facilities", "tugs"]
    with open(out / "ports.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(port_rows)

    records: list[list] = []
    start = TOY_START
    for key, script in CARGO_SCRIPTS.items():
        records.extend(_script_records(key, script, "cargo", port_pos, rng, start))
        start += 86400
    records.extend(_script_records(*TANKER_SCRIPT, "tanker", port_pos, rng, start))
    records.extend(_script_records(*PASSENGER_SCRIPT, "passenger", port_pos, rng,
                                   start + 86400))
    # alternating type reports tie cargo against tanker: modal type unknown
    mixed_key, mixed_script = MIXED_TYPE_SCRIPT
    mixed_types = ["cargo", "tanker"] * 8
    records.extend(_script_records(mixed_key, mixed_script, "cargo", port_pos,
                                   rng, start + 2 * 86400, type_sequence=mixed_types))
    records.extend(_script_records(*NO_IMO_SCRIPT, "cargo", port_pos, rng,
                                   start + 3 * 86400))

    bad_rows = [
        ["999000001", "9999001", "BAD1", format_timestamp(TOY_START), 95.0, 10.0, "cargo"],
        ["999000002", "9999002", "BAD2", format_timestamp(TOY_START), 10.0, 200.0, "cargo"],
        ["999000003", "9999003", "BAD3", "not-a-time", 10.0, 10.0, "cargo"],
        ["999000004", "9999004", "BAD4", "2018-13-45T99:99:99Z", 10.0, 10.0, "cargo"],
        ["999000005", "9999005", "BAD5", format_timestamp(TOY_START), 10.0],  # short
    ]
    # interleave the bad rows at fixed positions
    for offset, row in zip((10, 60, 120, 200, 300), bad_rows):
        records.insert(min(offset, len(records)), row)

    with open(out / "ais.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mmsi", "imo", "callsign", "timestamp", "lat", "lon",
                         "vessel_type"])
        writer.writerows(records)

    (out / "run.cfg").write_text(TOY_CONFIG_TEMPLATE)


TOY_CONFIG_TEMPLATE = """[inputs]
ais = data/toy/ais.csv
ports = data/toy/ports.csv

[schema]
format = delimited
timestamp_format = rfc3339
mmsi = mmsi
imo = imo
callsign = callsign
timestamp = timestamp
lat = lat
lon = lon
vessel_type = vessel_type

[geofence]
radius_l = 10000
radius_m = 6000
radius_s = 3000
radius_v = 2000
radius_default = 3000

[visits]
min_visit_messages = 1
vessel_types = cargo

[centrality]
damping = 0.85
tol = 1e-12
max_iter = 1000
wpr_log1p = true
closeness = in

[features]
threshold = 0.5
cycles = 10
seed = 0
blocklist = region_ref

[model]
k = 0.15
train_fraction = 0.75
seed = 7
trees = 100

[explain]
mode = sampled
shap_permutations = 256
sage_permutations = 512
background_cap = 128
background_batch = 32
seed = 7

[report]
top_count = 12

[run]
out = out/toy
threads = 1
"""


def expected_toy_voyages() -> list[tuple[VesselId, int, int]]:
    """(vessel, origin, destination) triples implied by the cargo scripts,
    with port 140 resolved to 139 and consecutive same-port visits
    collapsed."""
    resolution = {pid: pid for pid in range(101, 141)}
    resolution[140] = 139
    out = []
    for key, script in CARGO_SCRIPTS.items():
        mmsi, imo, callsign = _vessel_identity(key)
        vessel = VesselId(mmsi, imo, callsign)
        resolved = [resolution[p] for p in script]
        collapsed = [resolved[0]]
        for pid in resolved[1:]:
            if pid != collapsed[-1]:
                collapsed.append(pid)
        for a, b in zip(collapsed, collapsed[1:]):
            out.append((vessel, a, b))
    return out


def expected_toy_edge_weights() -> dict[tuple[int, int], int]:
    weights: dict[tuple[int, int], int] = {}
    for _, a, b in expected_toy_voyages():
        weights[(a, b)] = weights.get((a, b), 0) + 1
    return weights


@dataclass
class PlantedWorld:
    """A synthetic port system whose centrality is driven by two features."""

    port_ids: np.ndarray
    feature_names: list[str]
    X: np.ndarray  # aligned with port_ids
    table: CentralityTable  # centralities of the largest SCC
    planted: tuple[str, str] = ("DEPTH", "SIZE")


def make_planted_world(
    seed: int = 0,
    n_ports: int = 260,
    n_voyages: int = 16000,
    signal: float = 3.0,
) -> PlantedWorld:
    """Ports gain traffic proportionally to exp(signal * (depth + size)),
    so every centrality, and hence the aggregate, tracks the two planted
    features; six extra features are pure noise."""
    rng = np.random.default_rng(seed)
    depth = rng.integers(0, 16, n_ports).astype(np.float64)
    size = rng.integers(0, 4, n_ports).astype(np.float64)
    noise = rng.integers(0, 10, (n_ports, 6)).astype(np.float64)
    propensity = np.exp(signal * (depth / 15.0 + size / 3.0))
    weights = propensity / propensity.sum()

    origins = rng.choice(n_ports, size=n_voyages, p=weights)
    destinations = rng.choice(n_ports, size=n_voyages, p=weights)
    valid = origins != destinations
    voyages = [
        _MiniVoyage(int(o), int(d))
        for o, d in zip(origins[valid], destinations[valid])
    ]
    net = largest_scc(build_network(voyages))
    table = compute_centralities(net, CentralityParams())

    features = np.column_stack([depth, size, noise])
    keep = np.array([int(p) for p in table.port_ids])
    X = features[keep]
    return PlantedWorld(
        port_ids=table.port_ids.copy(),
        feature_names=["DEPTH", "SIZE", "N0", "N1", "N2", "N3", "N4", "N5"],
        X=X,
        table=table,
    )


@dataclass(frozen=True)
class _MiniVoyage:
    origin: int
    destination: int


__all__ = [
    "CARGO_SCRIPTS",
    "PlantedWorld",
    "TOY_SCC_PORTS",
    "TOY_SEED",
    "TOY_START",
    "expected_toy_edge_weights",
    "expected_toy_voyages",
    "make_planted_world",
    "make_toy_world",
]

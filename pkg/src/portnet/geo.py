"""Circular port geofences over a spherical earth.

Each port gets a circle sized by its harbor-size code.  Overlapping circles
are clustered and every member of a cluster is absorbed by the member with
the largest harbor size (ties to the smaller port id), so any point maps to
at most one retained port.  Assignment uses haversine distance against a
degree-grid spatial index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
METERS_PER_DEG_LAT = EARTH_RADIUS_M * math.pi / 180.0  # ~111,195 m

# L > M > S > V; anything else ranks below V
HARBOR_SIZE_RANK = {"L": 4, "M": 3, "S": 2, "V": 1}

DEFAULT_RADIUS_POLICY = {
    "L": 10_000.0,
    "M": 6_000.0,
    "S": 3_000.0,
    "V": 2_000.0,
}
DEFAULT_RADIUS_M = 3_000.0


class GeofenceError(ValueError):
    pass


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters between two lat/lon points."""
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


def haversine_m_many(lat: float, lon: float, lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    """Distance from one point to many (vectorized haversine)."""
    phi1 = math.radians(lat)
    phi2 = np.radians(lats)
    dphi = np.radians(lats - lat)
    dlam = np.radians(lons - lon)
    a = np.sin(dphi / 2) ** 2 + math.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(a))


@dataclass
class RadiusPolicy:
    """Geofence radius in meters per harbor-size code, with a default for
    missing or unknown codes."""

    by_size: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_RADIUS_POLICY))
    default: float = DEFAULT_RADIUS_M

    def radius_for(self, harbor_size: str | None) -> float:
        if harbor_size and harbor_size in self.by_size:
            return self.by_size[harbor_size]
        return self.default


def _size_rank(harbor_size: str | None) -> int:
    return HARBOR_SIZE_RANK.get(harbor_size or "", 0)


class GeofenceIndex:
    """Resolved port circles plus a degree-grid lookup structure.

    ``resolution`` maps every original port id to the port retained for its
    overlap cluster (identity for non-overlapping ports).  A point belongs to
    the retained port of any member circle containing it; the union of the
    cluster's circles acts as the retainer's fence.
    """

    def __init__(self, ports, radius_policy: RadiusPolicy | None = None):
        ports = list(ports)
        if not ports:
            raise GeofenceError("no ports to index")
        policy = radius_policy or RadiusPolicy()
        self.port_ids = np.array([p.port_id for p in ports], dtype=np.int64)
        if len(set(self.port_ids.tolist())) != len(ports):
            raise GeofenceError("duplicate port ids in registry")
        self.lats = np.array([p.lat for p in ports], dtype=np.float64)
        self.lons = np.array([p.lon for p in ports], dtype=np.float64)
        self.radii = np.array(
            [policy.radius_for(p.harbor_size) for p in ports], dtype=np.float64
        )
        ranks = np.array([_size_rank(p.harbor_size) for p in ports], dtype=np.int64)

        n = len(ports)
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(n):
            d = haversine_m_many(self.lats[i], self.lons[i], self.lats, self.lons)
            overlapping = np.nonzero(d < self.radii[i] + self.radii)[0]
            for j in overlapping:
                if j <= i:
                    continue
                ri, rj = find(i), find(int(j))
                if ri != rj:
                    parent[ri] = rj

        clusters: dict[int, list[int]] = {}
        for i in range(n):
            clusters.setdefault(find(i), []).append(i)
        self.resolution: dict[int, int] = {}
        for members in clusters.values():
            retained = min(
                members, key=lambda i: (-ranks[i], int(self.port_ids[i]))
            )
            for i in members:
                self.resolution[int(self.port_ids[i])] = int(self.port_ids[retained])

        # grid cells cover each circle's bounding box; lookup probes one cell.
        # cell width divides 360 exactly so the antimeridian wrap is seamless
        raw = max(0.05, float(self.radii.max()) / METERS_PER_DEG_LAT)
        self._n_lon_cells = max(1, math.floor(360.0 / raw))
        self._cell_deg = 360.0 / self._n_lon_cells
        self._grid: dict[tuple[int, int], list[int]] = {}
        for i in range(n):
            dlat = self.radii[i] / METERS_PER_DEG_LAT
            coslat = max(math.cos(math.radians(self.lats[i])), 1e-6)
            dlon = self.radii[i] / (METERS_PER_DEG_LAT * coslat)
            lo_lat = self._lat_cell(self.lats[i] - dlat)
            hi_lat = self._lat_cell(self.lats[i] + dlat)
            lo_lon = math.floor((self.lons[i] - dlon) / self._cell_deg)
            hi_lon = math.floor((self.lons[i] + dlon) / self._cell_deg)
            for ci in range(lo_lat, hi_lat + 1):
                for cj in range(lo_lon, hi_lon + 1):
                    self._grid.setdefault((ci, self._wrap_lon_cell(cj)), []).append(i)

    def _lat_cell(self, lat: float) -> int:
        return math.floor(lat / self._cell_deg)

    def _wrap_lon_cell(self, cj: int) -> int:
        return cj % self._n_lon_cells

    def assign(self, lat: float, lon: float) -> int | None:
        """Retained port id whose circle contains the point, else None."""
        cell = (self._lat_cell(lat), self._wrap_lon_cell(math.floor(lon / self._cell_deg)))
        best = None
        for i in self._grid.get(cell, ()):
            if haversine_m(lat, lon, self.lats[i], self.lons[i]) <= self.radii[i]:
                pid = self.resolution[int(self.port_ids[i])]
                # overlap resolution guarantees all hits share one retainer
                best = pid if best is None else min(best, pid)
        return best

    def circles(self) -> list[tuple[int, float, float, float]]:
        """(port_id, lat, lon, radius_m) per original port."""
        return [
            (int(self.port_ids[i]), float(self.lats[i]), float(self.lons[i]),
             float(self.radii[i]))
            for i in range(len(self.port_ids))
        ]


def build_geofence_index(ports, radius_policy: RadiusPolicy | None = None) -> GeofenceIndex:
    return GeofenceIndex(ports, radius_policy)


def assign_port(lat: float, lon: float, index: GeofenceIndex) -> int | None:
    return index.assign(lat, lon)


__all__ = [
    "DEFAULT_RADIUS_M",
    "DEFAULT_RADIUS_POLICY",
    "EARTH_RADIUS_M",
    "GeofenceError",
    "GeofenceIndex",
    "HARBOR_SIZE_RANK",
    "RadiusPolicy",
    "assign_port",
    "build_geofence_index",
    "haversine_m",
    "haversine_m_many",
]

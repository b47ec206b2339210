"""Port feature table: profiling, cleaning, ordinal encoding, and iterative
imputation.

Cleaning drops blocklisted meta columns and anything with more than the
missing-fraction threshold (default 50%).  Categoricals are encoded to
integer codes in lexicographic level order.  Missing cells are filled by
cyclic column-wise least-squares regression: initialize at the column mean,
then for a fixed number of cycles refit each column on all the others and
overwrite only the originally-missing cells.
"""
from __future__ import annotations

import csv
from configparser import ConfigParser
from dataclasses import dataclass, field

import numpy as np


class FeatureError(ValueError):
    pass


class UnknownLevelError(FeatureError):
    def __init__(self, column: str, level: str):
        super().__init__(f"column {column!r}: unseen level {level!r}")
        self.column = column
        self.level = level


CONTINUOUS_DEFAULT = ("LATITUDE", "LONGITUDE")


@dataclass
class FeatureSpec:
    name: str
    kind: str  # "categorical" | "continuous"
    levels: list[str]  # sorted distinct non-missing levels (categorical only)
    missing_frac: float
    support: int
    cardinality: int


@dataclass
class RawTable:
    """String-valued feature table keyed by port id; None marks missing."""

    port_ids: list[int]
    columns: list[str]
    cells: list[list[str | None]]  # row-major, aligned with columns

    def column(self, name: str) -> list[str | None]:
        j = self.columns.index(name)
        return [row[j] for row in self.cells]


def raw_table_from_ports(ports, continuous: tuple[str, ...] = CONTINUOUS_DEFAULT) -> RawTable:
    """Assemble the raw table from registry rows; the registry's coordinates
    come along as the two continuous features."""
    names = set()
    for p in ports:
        names.update(p.raw_features)
    lat_name, lon_name = continuous[0], continuous[1]
    if names & {lat_name, lon_name}:
        raise FeatureError(
            f"registry feature columns shadow the coordinate features "
            f"{lat_name}/{lon_name}"
        )
    columns = sorted(names) + [lat_name, lon_name]
    rows = []
    ids = []
    for p in ports:
        row: list[str | None] = [p.raw_features.get(c) for c in sorted(names)]
        row.append(repr(float(p.lat)))
        row.append(repr(float(p.lon)))
        rows.append(row)
        ids.append(p.port_id)
    return RawTable(port_ids=ids, columns=columns, cells=rows)


def profile(table: RawTable, continuous: tuple[str, ...] = CONTINUOUS_DEFAULT) -> dict[str, FeatureSpec]:
    """Missing fraction, support, cardinality, and level list per column."""
    n = len(table.port_ids)
    specs = {}
    cont = {c.upper() for c in continuous}
    for name in table.columns:
        col = table.column(name)
        observed = [v for v in col if v is not None]
        support = len(observed)
        kind = "continuous" if name.upper() in cont else "categorical"
        levels = sorted(set(observed)) if kind == "categorical" else []
        specs[name] = FeatureSpec(
            name=name,
            kind=kind,
            levels=levels,
            missing_frac=(n - support) / n if n else 0.0,
            support=support,
            cardinality=len(set(observed)),
        )
    return specs


def clean(
    table: RawTable,
    specs: dict[str, FeatureSpec],
    blocklist: set[str] | None = None,
    threshold: float = 0.5,
) -> RawTable:
    """Drop blocklisted meta columns and columns missing more than
    ``threshold``; error when nothing survives."""
    blocklist = {b.upper() for b in (blocklist or set())}
    keep = [
        c for c in table.columns
        if c.upper() not in blocklist and specs[c].missing_frac <= threshold
    ]
    if not keep:
        raise FeatureError("no feature columns retained after cleaning")
    idx = [table.columns.index(c) for c in keep]
    return RawTable(
        port_ids=list(table.port_ids),
        columns=keep,
        cells=[[row[j] for j in idx] for row in table.cells],
    )


@dataclass
class FeatureTable:
    """Encoded numeric matrix with its missingness mask and level maps."""

    port_ids: np.ndarray  # int64 row index
    columns: list[str]
    values: np.ndarray  # float64 (n_rows, n_cols); NaN where missing pre-impute
    observed: np.ndarray  # bool mask of originally-observed cells
    level_maps: dict[str, dict[str, int]]  # categorical column -> level -> code
    kinds: dict[str, str] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(self.port_ids)

    def column_index(self, name: str) -> int:
        return self.columns.index(name)


def encode(table: RawTable, specs: dict[str, FeatureSpec]) -> FeatureTable:
    """Categoricals to integer codes by lexicographic level order;
    continuous pass through as floats."""
    n, d = len(table.port_ids), len(table.columns)
    values = np.full((n, d), np.nan)
    observed = np.zeros((n, d), dtype=bool)
    level_maps: dict[str, dict[str, int]] = {}
    kinds = {}
    for j, name in enumerate(table.columns):
        spec = specs[name]
        kinds[name] = spec.kind
        if spec.kind == "categorical":
            mapping = {lvl: k for k, lvl in enumerate(spec.levels)}
            level_maps[name] = mapping
            for i, cell in enumerate(table.column(name)):
                if cell is None:
                    continue
                if cell not in mapping:
                    raise UnknownLevelError(name, cell)
                values[i, j] = float(mapping[cell])
                observed[i, j] = True
        else:
            for i, cell in enumerate(table.column(name)):
                if cell is None:
                    continue
                values[i, j] = float(cell)
                observed[i, j] = True
    return FeatureTable(
        port_ids=np.asarray(table.port_ids, dtype=np.int64),
        columns=list(table.columns),
        values=values,
        observed=observed,
        level_maps=level_maps,
        kinds=kinds,
    )


def decode_cell(ft: FeatureTable, column: str, value: float, round_categorical: bool = True) -> str:
    """Back to a display string; imputed categorical predictions round to the
    nearest valid code."""
    if column in ft.level_maps:
        inverse = {v: k for k, v in ft.level_maps[column].items()}
        code = int(round(value)) if round_categorical else int(value)
        code = max(0, min(code, len(inverse) - 1))
        return inverse[code]
    return repr(float(value))


def impute(
    ft: FeatureTable,
    cycles: int = 10,
    seed: int = 0,
    ridge: float = 1e-6,
) -> FeatureTable:
    """Cyclic column-wise least-squares imputation.

    Missing cells start at the column mean; each cycle visits columns in
    ascending missing-fraction order, fits an intercept + all-other-columns
    regression on that column's observed cells, and overwrites only the
    originally-missing cells.  Observed cells are never touched.  The
    procedure is deterministic; ``seed`` is accepted for interface parity
    with stochastic regressors.
    """
    del seed  # OLS imputation has no randomness
    values = ft.values.copy()
    observed = ft.observed
    n, d = values.shape
    missing_frac = 1.0 - observed.mean(axis=0)
    if np.any(observed.sum(axis=0) == 0):
        bad = [ft.columns[j] for j in np.nonzero(observed.sum(axis=0) == 0)[0]]
        raise FeatureError(f"columns with no observed cells: {bad}")
    # initialize missing cells at the observed column mean
    for j in range(d):
        col_missing = ~observed[:, j]
        if col_missing.any():
            values[col_missing, j] = values[observed[:, j], j].mean()
    order = sorted(range(d), key=lambda j: (missing_frac[j], j))
    targets = [j for j in order if (~observed[:, j]).any()]
    for _ in range(cycles):
        for j in targets:
            rows_obs = observed[:, j]
            others = [k for k in range(d) if k != j]
            X = np.column_stack([np.ones(n), values[:, others]])
            xo = X[rows_obs]
            yo = values[rows_obs, j]
            gram = xo.T @ xo + ridge * np.eye(xo.shape[1])
            beta = np.linalg.solve(gram, xo.T @ yo)
            pred = X[~rows_obs] @ beta
            values[~rows_obs, j] = pred
    out = FeatureTable(
        port_ids=ft.port_ids.copy(),
        columns=list(ft.columns),
        values=values,
        observed=observed.copy(),
        level_maps={k: dict(v) for k, v in ft.level_maps.items()},
        kinds=dict(ft.kinds),
    )
    return out


def write_feature_table(ft: FeatureTable, csv_path, manifest_path, *,
                        threshold: float, cycles: int, seed: int) -> None:
    """Matrix as delimited text plus a key-value sidecar (retained features,
    level maps, parameters, mask); reload reproduces the matrix bit-exactly."""
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["port_id"] + ft.columns)
        for i in range(ft.n_rows):
            writer.writerow([int(ft.port_ids[i])] +
                            [repr(float(v)) for v in ft.values[i]])
    cfg = ConfigParser()
    cfg.optionxform = str  # preserve case in level names
    cfg["features"] = {
        "columns": ",".join(ft.columns),
        "threshold": repr(threshold),
        "cycles": str(cycles),
        "seed": str(seed),
    }
    cfg["kinds"] = {c: ft.kinds.get(c, "categorical") for c in ft.columns}
    for name, mapping in ft.level_maps.items():
        cfg[f"levels:{name}"] = {lvl: str(code) for lvl, code in mapping.items()}
    cfg["mask"] = {
        str(int(ft.port_ids[i])): "".join(
            "1" if ft.observed[i, j] else "0" for j in range(len(ft.columns)))
        for i in range(ft.n_rows)
    }
    with open(manifest_path, "w") as fh:
        cfg.write(fh)


def read_feature_table(csv_path, manifest_path) -> FeatureTable:
    cfg = ConfigParser()
    cfg.optionxform = str
    with open(manifest_path) as fh:
        cfg.read_file(fh)
    columns = cfg["features"]["columns"].split(",")
    level_maps = {}
    for section in cfg.sections():
        if section.startswith("levels:"):
            name = section.split(":", 1)[1]
            level_maps[name] = {lvl: int(code) for lvl, code in cfg[section].items()}
    kinds = dict(cfg["kinds"]) if cfg.has_section("kinds") else {}
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    port_ids = np.array([int(r["port_id"]) for r in rows], dtype=np.int64)
    values = np.array([[float(r[c]) for c in columns] for r in rows])
    observed = np.zeros(values.shape, dtype=bool)
    for i, pid in enumerate(port_ids):
        bits = cfg["mask"][str(int(pid))]
        observed[i] = [b == "1" for b in bits]
    return FeatureTable(
        port_ids=port_ids,
        columns=columns,
        values=values,
        observed=observed,
        level_maps=level_maps,
        kinds=kinds,
    )


__all__ = [
    "CONTINUOUS_DEFAULT",
    "FeatureError",
    "FeatureSpec",
    "FeatureTable",
    "RawTable",
    "UnknownLevelError",
    "clean",
    "decode_cell",
    "encode",
    "impute",
    "profile",
    "raw_table_from_ports",
    "read_feature_table",
    "write_feature_table",
]

"""Run configuration: a plain key-value (INI) file covering every stage.

A run is reproducible from the config plus the input files alone; the
config's canonical serialization is hashed into each stage manifest.
"""
from __future__ import annotations

import hashlib
from configparser import ConfigParser
from dataclasses import dataclass, field, replace
from pathlib import Path

from portnet.geo import DEFAULT_RADIUS_M, DEFAULT_RADIUS_POLICY, RadiusPolicy
from portnet.ingest import RecordSchema


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    ais_path: str = ""
    ports_path: str = ""
    out_dir: str = "out"
    aliases_path: str = ""
    features_registry: str = ""  # defaults to ports_path when empty
    schema: RecordSchema = field(default_factory=RecordSchema)
    radius_policy: RadiusPolicy = field(default_factory=RadiusPolicy)
    min_visit_messages: int = 1
    vessel_types: tuple[str, ...] = ("cargo",)
    damping: float = 0.85
    tol: float = 1e-12
    max_iter: int = 1000
    wpr_log1p: bool = True
    closeness_direction: str = "in"
    feature_threshold: float = 0.5
    impute_cycles: int = 10
    impute_seed: int = 0
    blocklist: tuple[str, ...] = ()
    label_k: float = 0.10
    train_fraction: float = 0.75
    model_seed: int = 7
    trees: int = 100
    explain_mode: str = "sampled"
    shap_permutations: int = 2048
    sage_permutations: int = 4096
    background_cap: int = 512
    background_batch: int = 128
    explain_seed: int = 7
    report_top_count: int = 12
    threads: int = 1

    def canonical(self) -> str:
        """Stable text form used for hashing."""
        parts = [
            f"ais={self.ais_path}",
            f"ports={self.ports_path}",
            f"aliases={self.aliases_path}",
            f"features_registry={self.features_registry}",
            f"schema={self.schema.format}/{self.schema.timestamp_format}/"
            f"{self.schema.delimiter}/"
            + ",".join(self.schema.required_columns()),
            "radius=" + ",".join(
                f"{k}:{self.radius_policy.by_size[k]!r}"
                for k in sorted(self.radius_policy.by_size)
            ) + f";default:{self.radius_policy.default!r}",
            f"min_visit_messages={self.min_visit_messages}",
            "vessel_types=" + ",".join(self.vessel_types),
            f"damping={self.damping!r}",
            f"tol={self.tol!r}",
            f"max_iter={self.max_iter}",
            f"wpr_log1p={self.wpr_log1p}",
            f"closeness={self.closeness_direction}",
            f"feature_threshold={self.feature_threshold!r}",
            f"impute_cycles={self.impute_cycles}",
            f"impute_seed={self.impute_seed}",
            "blocklist=" + ",".join(self.blocklist),
            f"label_k={self.label_k!r}",
            f"train_fraction={self.train_fraction!r}",
            f"model_seed={self.model_seed}",
            f"trees={self.trees}",
            f"explain_mode={self.explain_mode}",
            f"shap_permutations={self.shap_permutations}",
            f"sage_permutations={self.sage_permutations}",
            f"background_cap={self.background_cap}",
            f"background_batch={self.background_batch}",
            f"explain_seed={self.explain_seed}",
            f"report_top_count={self.report_top_count}",
        ]
        return "\n".join(parts)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def with_master_seed(self, seed: int) -> "RunConfig":
        """Derive all stage seeds from one master seed."""
        return replace(self, impute_seed=seed, model_seed=seed + 1,
                       explain_seed=seed + 2)


def _get(cfg: ConfigParser, section: str, option: str, default):
    if not cfg.has_option(section, default=None) if False else not cfg.has_option(section, option):
        return default
    raw = cfg.get(section, option).strip()
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config(path) -> RunConfig:
    path = Path(path)
    cfg = ConfigParser()
    read = cfg.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    base = RunConfig()

    schema = RecordSchema(
        mmsi=_get(cfg, "schema", "mmsi", "mmsi"),
        imo=_get(cfg, "schema", "imo", "imo"),
        callsign=_get(cfg, "schema", "callsign", "callsign"),
        timestamp=_get(cfg, "schema", "timestamp", "timestamp"),
        lat=_get(cfg, "schema", "lat", "lat"),
        lon=_get(cfg, "schema", "lon", "lon"),
        vessel_type=_get(cfg, "schema", "vessel_type", "vessel_type"),
        timestamp_format=_get(cfg, "schema", "timestamp_format", "rfc3339"),
        format=_get(cfg, "schema", "format", "delimited"),
        delimiter=_get(cfg, "schema", "delimiter", ","),
    )
    radius = RadiusPolicy(
        by_size={
            "L": _get(cfg, "geofence", "radius_l", DEFAULT_RADIUS_POLICY["L"]),
            "M": _get(cfg, "geofence", "radius_m", DEFAULT_RADIUS_POLICY["M"]),
            "S": _get(cfg, "geofence", "radius_s", DEFAULT_RADIUS_POLICY["S"]),
            "V": _get(cfg, "geofence", "radius_v", DEFAULT_RADIUS_POLICY["V"]),
        },
        default=_get(cfg, "geofence", "radius_default", DEFAULT_RADIUS_M),
    )
    vessel_types = tuple(
        t.strip() for t in
        _get(cfg, "visits", "vessel_types", "cargo").split(",") if t.strip()
    )
    blocklist_raw = _get(cfg, "features", "blocklist", "")
    blocklist = tuple(b.strip() for b in blocklist_raw.split(",") if b.strip())

    return RunConfig(
        ais_path=_get(cfg, "inputs", "ais", base.ais_path),
        ports_path=_get(cfg, "inputs", "ports", base.ports_path),
        aliases_path=_get(cfg, "inputs", "aliases", ""),
        features_registry=_get(cfg, "inputs", "features_registry", ""),
        out_dir=_get(cfg, "run", "out", base.out_dir),
        schema=schema,
        radius_policy=radius,
        min_visit_messages=_get(cfg, "visits", "min_visit_messages", 1),
        vessel_types=vessel_types,
        damping=_get(cfg, "centrality", "damping", base.damping),
        tol=_get(cfg, "centrality", "tol", base.tol),
        max_iter=_get(cfg, "centrality", "max_iter", base.max_iter),
        wpr_log1p=_get(cfg, "centrality", "wpr_log1p", base.wpr_log1p),
        closeness_direction=_get(cfg, "centrality", "closeness", "in"),
        feature_threshold=_get(cfg, "features", "threshold", base.feature_threshold),
        impute_cycles=_get(cfg, "features", "cycles", base.impute_cycles),
        impute_seed=_get(cfg, "features", "seed", base.impute_seed),
        blocklist=blocklist,
        label_k=_get(cfg, "model", "k", base.label_k),
        train_fraction=_get(cfg, "model", "train_fraction", base.train_fraction),
        model_seed=_get(cfg, "model", "seed", base.model_seed),
        trees=_get(cfg, "model", "trees", base.trees),
        explain_mode=_get(cfg, "explain", "mode", base.explain_mode),
        shap_permutations=_get(cfg, "explain", "shap_permutations",
                               base.shap_permutations),
        sage_permutations=_get(cfg, "explain", "sage_permutations",
                               base.sage_permutations),
        background_cap=_get(cfg, "explain", "background_cap", base.background_cap),
        background_batch=_get(cfg, "explain", "background_batch",
                              base.background_batch),
        explain_seed=_get(cfg, "explain", "seed", base.explain_seed),
        report_top_count=_get(cfg, "report", "top_count", base.report_top_count),
        threads=_get(cfg, "run", "threads", base.threads),
    )


__all__ = ["ConfigError", "RunConfig", "load_config"]

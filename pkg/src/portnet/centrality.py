"""Six port centralities and their z-score aggregate.

In/out degree, PageRank and its trip-weighted variant, betweenness (Brandes,
unnormalized, unweighted directed shortest paths), and incoming-distance
closeness.  Each measure is standardized to a z-score (sample standard
deviation, divisor N-1) and the aggregate importance of a port is the mean of
the six z-scores; ports are ranked descending with ties broken by port id.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from portnet import _kernels
from portnet.network import PortsNetwork
from portnet.network import degrees as _net_degrees

CENTRALITY_NAMES = ("DI", "DO", "PR", "wPR", "BC", "CC")

TABLE_HEADER = [
    "port_id", "DI", "DO", "PR", "wPR", "BC", "CC",
    "zDI", "zDO", "zPR", "zwPR", "zBC", "zCC", "A", "rank",
]


class DegenerateCentralityError(ValueError):
    """Raised when a centrality is constant and cannot be standardized."""


class PageRankNonConvergence(RuntimeError):
    def __init__(self, iterations: int, residual: float, last: np.ndarray):
        super().__init__(
            f"PageRank did not converge after {iterations} iterations "
            f"(L1 residual {residual:.3e})"
        )
        self.last = last


@dataclass
class CentralityParams:
    damping: float = 0.85
    tol: float = 1e-12
    max_iter: int = 1000
    wpr_log1p: bool = True  # False: raw ln(w), dropping single-trip edges
    closeness_direction: str = "in"
    threads: int = 1
    chunk_size: int = 64


def degrees(net: PortsNetwork) -> tuple[np.ndarray, np.ndarray]:
    """(DI, DO): distinct in-/out-neighbor counts, weights ignored."""
    return _net_degrees(net)


def _edge_probabilities(net: PortsNetwork, weighted: bool, log1p: bool) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge transition probabilities and the dangling-node mask.

    Unweighted mode splits a node's mass equally over out-neighbors; weighted
    mode splits proportionally to the log of the trip count.
    """
    n = net.n_nodes
    if weighted:
        w = net.weights.astype(np.float64)
        logw = np.log1p(w) if log1p else np.log(w)
    else:
        logw = np.ones(net.n_edges, dtype=np.float64)
    row_sums = np.zeros(n, dtype=np.float64)
    src = np.repeat(np.arange(n), np.diff(net.indptr))
    np.add.at(row_sums, src, logw)
    dangling = row_sums == 0.0
    safe = np.where(dangling, 1.0, row_sums)
    prob = logw / safe[src]
    return prob, dangling


def pagerank(
    net: PortsNetwork,
    damping: float = 0.85,
    weighted: bool = False,
    tol: float = 1e-12,
    max_iter: int = 1000,
    log1p: bool = True,
) -> np.ndarray:
    """Power iteration to the damped stationary distribution.

    Dangling mass is redistributed uniformly.  Converged when the L1 change
    between iterates drops below ``tol``; raises PageRankNonConvergence
    (carrying the last iterate) otherwise.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie in (0, 1)")
    n = net.n_nodes
    prob, dangling = _edge_probabilities(net, weighted, log1p)
    src = np.repeat(np.arange(n), np.diff(net.indptr))
    x = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iter):
        acc = np.zeros(n)
        np.add.at(acc, net.indices, prob * x[src])
        x_new = base + damping * acc + damping * x[dangling].sum() / n
        residual = float(np.abs(x_new - x).sum())
        x = x_new
        if residual < tol:
            return x
    raise PageRankNonConvergence(max_iter, residual, x)


def _bc_chunks(n: int, chunk_size: int) -> list[np.ndarray]:
    sources = np.arange(n, dtype=np.int64)
    return [sources[i: i + chunk_size] for i in range(0, n, chunk_size)]


_WORKER_GRAPH: dict = {}


def _bc_worker_init(indptr, indices, rindptr, rindices, n):
    _WORKER_GRAPH["args"] = (indptr, indices, rindptr, rindices, n)


def _bc_worker(chunk: np.ndarray) -> np.ndarray:
    indptr, indices, rindptr, rindices, n = _WORKER_GRAPH["args"]
    return _kernels.brandes_partial(indptr, indices, rindptr, rindices, n, chunk)


def betweenness(net: PortsNetwork, threads: int = 1, chunk_size: int = 64) -> np.ndarray:
    """Unnormalized betweenness over ordered pairs, endpoints excluded.

    Sources are processed in fixed-size chunks and partial vectors are summed
    in chunk order, so the result is identical whatever ``threads`` is.
    """
    n = net.n_nodes
    chunks = _bc_chunks(n, chunk_size)
    graph_args = (net.indptr, net.indices, net.rindptr, net.rindices, n)
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_bc_worker_init, initargs=graph_args
        ) as pool:
            partials = list(pool.map(_bc_worker, chunks))
    else:
        partials = [
            _kernels.brandes_partial(*graph_args, chunk) for chunk in chunks
        ]
    bc = np.zeros(n, dtype=np.float64)
    for partial in partials:
        bc += partial
    return bc


def closeness(net: PortsNetwork, direction: str = "in") -> tuple[np.ndarray, np.ndarray]:
    """Hop-based closeness: node count over the summed shortest distances.

    ``direction="in"`` sums distances INTO each node (the default reading);
    "out" uses outgoing distances instead.  Nodes not reached from every
    other node get NaN and are marked in the returned flag array.
    """
    n = net.n_nodes
    if direction == "in":
        indptr, indices = net.rindptr, net.rindices
    elif direction == "out":
        indptr, indices = net.indptr, net.indices
    else:
        raise ValueError("direction must be 'in' or 'out'")
    sources = np.arange(n, dtype=np.int64)
    sums, _, reached = _kernels.bfs_aggregate(indptr, indices, n, sources)
    flagged = reached != n - 1
    values = np.full(n, np.nan)
    ok = ~flagged
    values[ok] = n / sums[ok].astype(np.float64)
    return values, flagged


def zscore(values: np.ndarray) -> np.ndarray:
    """(value - mean) / sample standard deviation (divisor N-1)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise DegenerateCentralityError("need at least 2 ports to standardize")
    if np.all(values == values[0]):
        raise DegenerateCentralityError("degenerate centrality: constant values")
    return (values - values.mean()) / values.std(ddof=1)


def aggregate(zscores: dict[str, np.ndarray], port_ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean of the standardized centralities plus a descending ranking.

    Returns (A, rank) where rank is 1-based, ties broken by smaller port id.
    """
    missing = [c for c in CENTRALITY_NAMES if c not in zscores]
    if missing:
        raise ValueError(f"missing standardized centralities: {missing}")
    n = len(port_ids)
    for name, z in zscores.items():
        if len(z) != n:
            raise ValueError(f"centrality {name} has {len(z)} values for {n} ports")
    total = np.zeros(n, dtype=np.float64)
    for name in CENTRALITY_NAMES:
        total += zscores[name]
    a = total / len(CENTRALITY_NAMES)
    order = np.lexsort((port_ids, -a))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(1, n + 1)
    return a, rank


@dataclass
class CentralityTable:
    """Per-port raw centralities, z-scores, aggregate A and rank."""

    port_ids: np.ndarray
    raw: dict[str, np.ndarray]
    z: dict[str, np.ndarray]
    a: np.ndarray
    rank: np.ndarray

    def top(self, count: int) -> list[int]:
        order = np.argsort(self.rank)
        return [int(self.port_ids[i]) for i in order[:count]]


def compute_centralities(net: PortsNetwork, params: CentralityParams | None = None) -> CentralityTable:
    """All six measures on a strongly connected network, standardized and
    aggregated."""
    params = params or CentralityParams()
    di, do = degrees(net)
    pr = pagerank(net, params.damping, False, params.tol, params.max_iter)
    wpr = pagerank(net, params.damping, True, params.tol, params.max_iter, params.wpr_log1p)
    bc = betweenness(net, params.threads, params.chunk_size)
    cc, flagged = closeness(net, params.closeness_direction)
    if flagged.any():
        bad = [int(net.nodes[i]) for i in np.nonzero(flagged)[0][:5]]
        raise ValueError(
            f"closeness undefined for ports {bad}...: run on the largest "
            "strongly connected component"
        )
    raw = {"DI": di.astype(np.float64), "DO": do.astype(np.float64),
           "PR": pr, "wPR": wpr, "BC": bc, "CC": cc}
    z = {name: zscore(vals) for name, vals in raw.items()}
    a, rank = aggregate(z, net.nodes)
    return CentralityTable(port_ids=net.nodes.copy(), raw=raw, z=z, a=a, rank=rank)


def write_centrality_table(table: CentralityTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_HEADER)
        for i in range(len(table.port_ids)):
            row = [int(table.port_ids[i])]
            row += [repr(float(table.raw[c][i])) for c in CENTRALITY_NAMES]
            row += [repr(float(table.z[c][i])) for c in CENTRALITY_NAMES]
            row.append(repr(float(table.a[i])))
            row.append(int(table.rank[i]))
            writer.writerow(row)


def read_centrality_table(path) -> CentralityTable:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = len(rows)
    port_ids = np.array([int(r["port_id"]) for r in rows], dtype=np.int64)
    raw = {c: np.array([float(r[c]) for r in rows]) for c in CENTRALITY_NAMES}
    z = {c: np.array([float(r["z" + c]) for r in rows]) for c in CENTRALITY_NAMES}
    a = np.array([float(r["A"]) for r in rows])
    rank = np.array([int(r["rank"]) for r in rows], dtype=np.int64)
    return CentralityTable(port_ids=port_ids, raw=raw, z=z, a=a, rank=rank)


__all__ = [
    "CENTRALITY_NAMES",
    "TABLE_HEADER",
    "CentralityParams",
    "CentralityTable",
    "DegenerateCentralityError",
    "PageRankNonConvergence",
    "aggregate",
    "betweenness",
    "closeness",
    "compute_centralities",
    "degrees",
    "pagerank",
    "read_centrality_table",
    "write_centrality_table",
    "zscore",
]

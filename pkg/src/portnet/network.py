"""Weighted directed ports network: construction, largest SCC, statistics.

Nodes are port ids; an edge (u, v) carries the number of voyages observed
from u to v.  The graph is simple (one edge per ordered pair, no self-loops)
and immutable once built.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from portnet import _kernels


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkStats:
    nodes: int
    edges: int
    bidirectional_edges: int  # unordered pairs linked in both directions
    density: float
    diameter: int
    avg_shortest_path: float
    avg_clustering: float
    scc_restricted: bool  # path metrics computed on the largest SCC only


class PortsNetwork:
    """Immutable directed graph over port ids with integer edge weights.

    Adjacency is stored in CSR form both forward and reversed; neighbor
    indices inside a row are sorted ascending, which fixes the accumulation
    order used by the kernels.
    """

    def __init__(self, edges: dict[tuple[int, int], int]):
        if not edges:
            raise NetworkError("network requires at least one edge")
        node_set = set()
        for (u, v), w in edges.items():
            if u == v:
                raise NetworkError(f"self-loop on port {u}")
            if w < 1:
                raise NetworkError(f"non-positive weight on edge {u}->{v}")
            node_set.add(u)
            node_set.add(v)
        self.nodes = np.array(sorted(node_set), dtype=np.int64)
        self._index = {int(p): i for i, p in enumerate(self.nodes)}
        n = len(self.nodes)
        rows = sorted(
            ((self._index[u], self._index[v], w) for (u, v), w in edges.items())
        )
        m = len(rows)
        self.indices = np.empty(m, dtype=np.int32)
        self.weights = np.empty(m, dtype=np.int64)
        out_deg = np.zeros(n, dtype=np.int64)
        for k, (i, j, w) in enumerate(rows):
            self.indices[k] = j
            self.weights[k] = w
            out_deg[i] += 1
        self.indptr = np.concatenate(([0], np.cumsum(out_deg)))
        rrows = sorted((j, i, w) for i, j, w in rows)
        self.rindices = np.empty(m, dtype=np.int32)
        self.rweights = np.empty(m, dtype=np.int64)
        in_deg = np.zeros(n, dtype=np.int64)
        for k, (j, i, w) in enumerate(rrows):
            self.rindices[k] = i
            self.rweights[k] = w
            in_deg[j] += 1
        self.rindptr = np.concatenate(([0], np.cumsum(in_deg)))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.indices)

    def node_index(self, port_id: int) -> int:
        return self._index[port_id]

    def edge_weight(self, u: int, v: int) -> int:
        i, j = self._index[u], self._index[v]
        lo, hi = self.indptr[i], self.indptr[i + 1]
        k = np.searchsorted(self.indices[lo:hi], j)
        if k < hi - lo and self.indices[lo + k] == j:
            return int(self.weights[lo + k])
        raise KeyError(f"no edge {u}->{v}")

    def edge_dict(self) -> dict[tuple[int, int], int]:
        out = {}
        for i in range(self.n_nodes):
            u = int(self.nodes[i])
            for k in range(self.indptr[i], self.indptr[i + 1]):
                out[(u, int(self.nodes[self.indices[k]]))] = int(self.weights[k])
        return out


def build_network(voyages: Iterable) -> PortsNetwork:
    """Count voyages per ordered (origin, destination) pair into edge weights."""
    counts: Counter = Counter()
    for voy in voyages:
        counts[(voy.origin, voy.destination)] += 1
    if not counts:
        raise NetworkError("no voyages to build a network from")
    return PortsNetwork(dict(counts))


def strongly_connected_components(net: PortsNetwork) -> list[list[int]]:
    """Tarjan's algorithm (iterative) returning components as node-index lists."""
    n = net.n_nodes
    indptr, indices = net.indptr, net.indices
    index = np.full(n, -1, dtype=np.int64)
    lowlink = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, indptr[root])]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, ptr = work[-1]
            if ptr < indptr[v + 1]:
                work[-1] = (v, ptr + 1)
                w = int(indices[ptr])
                if index[w] == -1:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, indptr[w]))
                elif on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    lowlink[parent] = min(lowlink[parent], lowlink[v])
                if lowlink[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(comp)
    return comps


def largest_scc(net: PortsNetwork) -> PortsNetwork:
    """Induced subgraph on the largest SCC; ties go to the component holding
    the smallest port id."""
    comps = strongly_connected_components(net)
    best = None
    best_key = None
    for comp in comps:
        min_pid = min(int(net.nodes[i]) for i in comp)
        key = (-len(comp), min_pid)
        if best_key is None or key < best_key:
            best_key = key
            best = comp
    keep = set(best)
    edges = {}
    for i in best:
        u = int(net.nodes[i])
        for k in range(net.indptr[i], net.indptr[i + 1]):
            j = int(net.indices[k])
            if j in keep:
                edges[(u, int(net.nodes[j]))] = int(net.weights[k])
    if not edges:
        # single-node component: no internal edges to carry over
        raise NetworkError(
            "largest strongly connected component has a single node"
        )
    return PortsNetwork(edges)


def is_strongly_connected(net: PortsNetwork) -> bool:
    """Double BFS check: every node reachable from node 0 both ways."""
    n = net.n_nodes
    src = np.array([0], dtype=np.int64)
    _, _, fwd = _kernels.bfs_aggregate(net.indptr, net.indices, n, src)
    _, _, bwd = _kernels.bfs_aggregate(net.rindptr, net.rindices, n, src)
    return int(fwd[0]) == n - 1 and int(bwd[0]) == n - 1


def _undirected_adjacency(net: PortsNetwork) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(net.n_nodes)]
    for i in range(net.n_nodes):
        for k in range(net.indptr[i], net.indptr[i + 1]):
            j = int(net.indices[k])
            adj[i].add(j)
            adj[j].add(i)
    return adj


def average_clustering(net: PortsNetwork) -> float:
    """Mean local clustering on the undirected unweighted projection.

    Nodes with fewer than two neighbors contribute 0.
    """
    adj = _undirected_adjacency(net)
    total = 0.0
    for i, nbrs in enumerate(adj):
        k = len(nbrs)
        if k < 2:
            continue
        links = 0
        for u in nbrs:
            links += len(adj[u] & nbrs)
        total += links / (k * (k - 1))  # each triangle edge counted twice
    return total / net.n_nodes


def count_bidirectional_pairs(net: PortsNetwork) -> int:
    seen = set()
    pairs = 0
    for i in range(net.n_nodes):
        for k in range(net.indptr[i], net.indptr[i + 1]):
            j = int(net.indices[k])
            if (j, i) in seen:
                pairs += 1
            seen.add((i, j))
    return pairs


def network_stats(net: PortsNetwork, threads: int = 1) -> NetworkStats:
    """Descriptive statistics; path metrics fall back to the largest SCC when
    the graph is not strongly connected (flagged via ``scc_restricted``)."""
    n = net.n_nodes
    if n < 2:
        raise NetworkError("density undefined on a single-node graph")
    density = net.n_edges / (n * (n - 1))
    restricted = not is_strongly_connected(net)
    path_net = largest_scc(net) if restricted else net
    sources = np.arange(path_net.n_nodes, dtype=np.int64)
    sums, eccs, reached = _kernels.bfs_aggregate(
        path_net.indptr, path_net.indices, path_net.n_nodes, sources
    )
    pair_count = int(reached.sum())
    if pair_count == 0:
        raise NetworkError("no reachable ordered pairs")
    return NetworkStats(
        nodes=n,
        edges=net.n_edges,
        bidirectional_edges=count_bidirectional_pairs(net),
        density=density,
        diameter=int(eccs.max()),
        avg_shortest_path=float(sums.sum() / pair_count),
        avg_clustering=average_clustering(net),
        scc_restricted=restricted,
    )


def write_edgelist(net: PortsNetwork, path) -> None:
    """`src,dst,weight` rows sorted by (src, dst); round-trips bit-exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight"])
        for i in range(net.n_nodes):
            u = int(net.nodes[i])
            for k in range(net.indptr[i], net.indptr[i + 1]):
                writer.writerow([u, int(net.nodes[net.indices[k]]), int(net.weights[k])])


def read_edgelist(path) -> PortsNetwork:
    edges = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            edges[(int(row["src"]), int(row["dst"]))] = int(row["weight"])
    return PortsNetwork(edges)


def degrees(net: PortsNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Distinct in-/out-neighbor counts per node (weights ignored)."""
    di = np.diff(net.rindptr).astype(np.int64)
    do = np.diff(net.indptr).astype(np.int64)
    return di, do


__all__ = [
    "NetworkError",
    "NetworkStats",
    "PortsNetwork",
    "average_clustering",
    "build_network",
    "count_bidirectional_pairs",
    "degrees",
    "is_strongly_connected",
    "largest_scc",
    "network_stats",
    "read_edgelist",
    "strongly_connected_components",
    "write_edgelist",
]

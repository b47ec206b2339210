"""Pure-Python graph kernels (fallback when the compiled extension is absent).

Both backends implement the same loops in the same order, so their
floating-point results are bit-identical; callers may treat the backends as
interchangeable.

Graphs arrive in CSR form: ``indptr`` (int64, length n+1) and ``indices``
(int32, length m).  Neighbor order inside a row is part of the contract --
accumulation order follows it.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def bfs_aggregate(indptr, indices, n, sources):
    """Per-source BFS aggregates over an unweighted directed graph.

    Returns three int64 arrays aligned with ``sources``: the sum of hop
    distances to every reached node, the eccentricity (max distance), and the
    number of reached nodes.  The source itself is excluded from all three.
    """
    ip = indptr.tolist()
    idx = indices.tolist()
    srcs = sources.tolist()
    ns = len(srcs)
    sum_out = np.zeros(ns, dtype=np.int64)
    ecc_out = np.zeros(ns, dtype=np.int64)
    reach_out = np.zeros(ns, dtype=np.int64)
    dist = [-1] * n
    for k, s in enumerate(srcs):
        for i in range(n):
            dist[i] = -1
        dist[s] = 0
        queue = [s]
        head = 0
        total = 0
        ecc = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            dv = dist[v] + 1
            for e in range(ip[v], ip[v + 1]):
                w = idx[e]
                if dist[w] < 0:
                    dist[w] = dv
                    total += dv
                    if dv > ecc:
                        ecc = dv
                    queue.append(w)
        sum_out[k] = total
        ecc_out[k] = ecc
        reach_out[k] = len(queue) - 1
    return sum_out, ecc_out, reach_out


def brandes_partial(indptr, indices, rindptr, rindices, n, sources):
    """Betweenness contributions of the given sources (Brandes accumulation).

    Unweighted directed shortest paths, unnormalized, endpoints excluded.
    Predecessors are recovered from the reverse CSR during the dependency
    sweep instead of being stored per node.
    """
    ip = indptr.tolist()
    idx = indices.tolist()
    rip = rindptr.tolist()
    ridx = rindices.tolist()
    bc = [0.0] * n
    dist = [0] * n
    sigma = [0.0] * n
    delta = [0.0] * n
    for s in sources.tolist():
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order = [s]
        head = 0
        while head < len(order):
            v = order[head]
            head += 1
            dv = dist[v] + 1
            sv = sigma[v]
            for e in range(ip[v], ip[v + 1]):
                w = idx[e]
                if dist[w] < 0:
                    dist[w] = dv
                    order.append(w)
                if dist[w] == dv:
                    sigma[w] += sv
        for i in range(len(order) - 1, 0, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w] - 1
            for e in range(rip[w], rip[w + 1]):
                u = ridx[e]
                if dist[u] == dw:
                    delta[u] += sigma[u] * coeff
            bc[w] += delta[w]
    return np.asarray(bc, dtype=np.float64)

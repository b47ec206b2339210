# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled graph kernels: per-source BFS aggregates and Brandes accumulation.

Mirrors _pykernels loop-for-loop so both backends produce bit-identical
floating-point results.
"""
import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

BACKEND = "compiled"


def bfs_aggregate(cnp.int64_t[::1] indptr, cnp.int32_t[::1] indices,
                  int n, cnp.int64_t[::1] sources):
    """Per-source BFS aggregates; see the pure-Python twin for semantics."""
    cdef Py_ssize_t ns = sources.shape[0]
    sum_np = np.zeros(ns, dtype=np.int64)
    ecc_np = np.zeros(ns, dtype=np.int64)
    reach_np = np.zeros(ns, dtype=np.int64)
    cdef cnp.int64_t[::1] sum_out = sum_np
    cdef cnp.int64_t[::1] ecc_out = ecc_np
    cdef cnp.int64_t[::1] reach_out = reach_np

    cdef int *dist = <int *> malloc(n * sizeof(int))
    cdef int *queue = <int *> malloc(n * sizeof(int))
    if dist == NULL or queue == NULL:
        free(dist)
        free(queue)
        raise MemoryError()

    cdef Py_ssize_t k, e
    cdef int s, v, w, dv, head, tail, i
    cdef long long total, ecc
    try:
        for k in range(ns):
            s = <int> sources[k]
            for i in range(n):
                dist[i] = -1
            dist[s] = 0
            queue[0] = s
            head = 0
            tail = 1
            total = 0
            ecc = 0
            while head < tail:
                v = queue[head]
                head += 1
                dv = dist[v] + 1
                for e in range(indptr[v], indptr[v + 1]):
                    w = indices[e]
                    if dist[w] < 0:
                        dist[w] = dv
                        total += dv
                        if dv > ecc:
                            ecc = dv
                        queue[tail] = w
                        tail += 1
            sum_out[k] = total
            ecc_out[k] = ecc
            reach_out[k] = tail - 1
    finally:
        free(dist)
        free(queue)
    return sum_np, ecc_np, reach_np


def brandes_partial(cnp.int64_t[::1] indptr, cnp.int32_t[::1] indices,
                    cnp.int64_t[::1] rindptr, cnp.int32_t[::1] rindices,
                    int n, cnp.int64_t[::1] sources):
    """Betweenness contributions of the given sources; see the Python twin."""
    bc_np = np.zeros(n, dtype=np.float64)
    cdef cnp.float64_t[::1] bc = bc_np

    cdef int *dist = <int *> malloc(n * sizeof(int))
    cdef int *order = <int *> malloc(n * sizeof(int))
    cdef double *sigma = <double *> malloc(n * sizeof(double))
    cdef double *delta = <double *> malloc(n * sizeof(double))
    if dist == NULL or order == NULL or sigma == NULL or delta == NULL:
        free(dist)
        free(order)
        free(sigma)
        free(delta)
        raise MemoryError()

    cdef Py_ssize_t k, e
    cdef int s, v, w, u, dv, dw, head, tail, i
    cdef double sv, coeff
    try:
        for k in range(sources.shape[0]):
            s = <int> sources[k]
            for i in range(n):
                dist[i] = -1
                sigma[i] = 0.0
                delta[i] = 0.0
            dist[s] = 0
            sigma[s] = 1.0
            order[0] = s
            head = 0
            tail = 1
            while head < tail:
                v = order[head]
                head += 1
                dv = dist[v] + 1
                sv = sigma[v]
                for e in range(indptr[v], indptr[v + 1]):
                    w = indices[e]
                    if dist[w] < 0:
                        dist[w] = dv
                        order[tail] = w
                        tail += 1
                    if dist[w] == dv:
                        sigma[w] += sv
            for i in range(tail - 1, 0, -1):
                w = order[i]
                coeff = (1.0 + delta[w]) / sigma[w]
                dw = dist[w] - 1
                for e in range(rindptr[w], rindptr[w + 1]):
                    u = rindices[e]
                    if dist[u] == dw:
                        delta[u] += sigma[u] * coeff
                bc[w] += delta[w]
    finally:
        free(dist)
        free(order)
        free(sigma)
        free(delta)
    return bc_np

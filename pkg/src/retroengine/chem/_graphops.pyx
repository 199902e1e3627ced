# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for walk counting and all-pairs BFS distances."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def walk_powers(senses, int max_hop, int clip):
    """Per-sense walk-count matrices for hops 1..max_hop, clipped at ``clip``."""
    cdef cnp.ndarray[cnp.int64_t, ndim=3] sarr = np.ascontiguousarray(
        senses, dtype=np.int64
    )
    cdef int k_b = sarr.shape[0]
    cdef int n = sarr.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=4] out = np.zeros(
        (k_b, max_hop, n, n), dtype=np.int64
    )
    cdef cnp.ndarray[cnp.int64_t, ndim=2] adj, acc, nxt
    cdef int i, j, u, v, w
    cdef long total
    for i in range(k_b):
        adj = sarr[i].copy()
        acc = adj.copy()
        for j in range(max_hop):
            for u in range(n):
                for v in range(n):
                    total = acc[u, v]
                    out[i, j, u, v] = total if total < clip else clip
            if j + 1 < max_hop:
                nxt = np.zeros((n, n), dtype=np.int64)
                for u in range(n):
                    for w in range(n):
                        if acc[u, w] == 0:
                            continue
                        total = acc[u, w]
                        for v in range(n):
                            if adj[w, v]:
                                nxt[u, v] += total
                acc = nxt
    return out


def bfs_all_pairs(adjacency, double sentinel):
    """All-pairs shortest path lengths (unit weights) via repeated BFS."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] adj = np.ascontiguousarray(
        adjacency, dtype=np.int64
    )
    cdef int n = adj.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dist = np.full(
        (n, n), sentinel, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.int64_t, ndim=1] queue = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] seen = np.zeros(n, dtype=np.int64)
    cdef int src, head, tail, v, u
    for src in range(n):
        seen[:] = 0
        seen[src] = 1
        dist[src, src] = 0.0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            for u in range(n):
                if adj[v, u] and not seen[u]:
                    seen[u] = 1
                    dist[src, u] = dist[src, v] + 1.0
                    queue[tail] = u
                    tail += 1
    return dist

"""Pure NumPy implementations of the structural-matrix kernels.

Drop-in fallback for the compiled extension; selected at import time by
:mod:`retroengine.chem.structure`.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def walk_powers(senses: np.ndarray, max_hop: int, clip: int) -> np.ndarray:
    """Per-sense walk-count matrices for hops 1..max_hop, clipped at ``clip``.

    Counts are accumulated exactly in int64; only the reported matrices are
    clipped, so entry (i, j, u, v) equals min(#walks, clip).
    """
    k_b, n, _ = senses.shape
    out = np.zeros((k_b, max_hop, n, n), dtype=np.int64)
    for i in range(k_b):
        adj = senses[i].astype(np.int64)
        acc = adj.copy()
        for j in range(max_hop):
            out[i, j] = np.minimum(acc, clip)
            if j + 1 < max_hop:
                acc = acc @ adj
    return out


def bfs_all_pairs(adjacency: np.ndarray, sentinel: float) -> np.ndarray:
    """All-pairs shortest path lengths (unit weights) via repeated BFS."""
    n = adjacency.shape[0]
    neighbors = [np.nonzero(adjacency[v])[0] for v in range(n)]
    dist = np.full((n, n), sentinel, dtype=np.float64)
    for src in range(n):
        dist[src, src] = 0.0
        frontier = [src]
        d = 0
        seen = {src}
        while frontier:
            d += 1
            nxt = []
            for v in frontier:
                for u in neighbors[v]:
                    if u not in seen:
                        seen.add(u)
                        dist[src, u] = d
                        nxt.append(u)
            frontier = nxt
    return dist

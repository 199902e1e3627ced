"""Structural matrices consumed by the encoder.

Multi-sense bond matrices, clipped walk-count powers (atom-environment
radii) and all-pairs topological distances.  The hot kernels live in a
compiled extension when available, with a NumPy fallback selected here at
import time.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .graph import AROMATIC_ORDER, BOND_SENSES, MolGraph

try:  # compiled kernels, built via setup.py
    from . import _graphops as _ops  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - exercised when the ext is absent
    from . import _graphops_py as _ops  # type: ignore[no-redef]

from . import _graphops_py as _ops_py

BACKEND = _ops.BACKEND

#: Walk counts are clipped here before embedding lookup.
COUNT_CLIP = 8

#: Distance sentinel for disconnected atom pairs; fed to the RBF as-is.
D_INF = 64.0

#: Number of bond senses.
K_B = len(BOND_SENSES)


def sense_matrices(g: MolGraph) -> np.ndarray:
    """Binary (K_b, N, N) matrices: sigma, pi, triple, aromatic, conjugated, ring."""
    n = g.n_atoms
    out = np.zeros((K_B, n, n), dtype=np.int64)
    ring = g.ring_bonds()
    for (a, b), order in g.bonds.items():
        aromatic = order == AROMATIC_ORDER
        senses = {
            "sigma": True,
            "pi": order >= 2.0 or aromatic,
            "triple": order == 3.0,
            "aromatic": aromatic,
            "conjugated": _conjugated(g, a, b, order),
            "ring": (a, b) in ring,
        }
        for idx, name in enumerate(BOND_SENSES):
            if senses[name]:
                out[idx, a, b] = 1
                out[idx, b, a] = 1
    return out


def _conjugated(g: MolGraph, a: int, b: int, order: float) -> bool:
    """Single bond flanked by pi systems, or multiple bond adjacent to one."""

    def pi_other_than(atom_idx: int, skip: int) -> bool:
        return any(
            j != skip
            and (g.bond_order(atom_idx, j) >= 2.0 or g.bond_order(atom_idx, j) == AROMATIC_ORDER)
            for j in g.neighbors(atom_idx)
        )

    if order == AROMATIC_ORDER:
        return True
    if order >= 2.0:
        return pi_other_than(a, b) or pi_other_than(b, a)
    return pi_other_than(a, b) and pi_other_than(b, a)


def bond_order_matrix(g: MolGraph) -> np.ndarray:
    n = g.n_atoms
    out = np.zeros((n, n), dtype=np.float64)
    for (a, b), order in g.bonds.items():
        out[a, b] = order
        out[b, a] = order
    return out


def adjacency_powers(
    g: MolGraph, max_hop: int, clip: int = COUNT_CLIP, backend=None
) -> np.ndarray:
    """(K_b, max_hop, N, N) clipped walk counts; hop j counts walks of length j+1.

    ``max_hop = 0`` yields an empty hop axis.
    """
    if not 0 <= max_hop <= 5:
        raise ValueError(f"max_hop must be in [0, 5], got {max_hop}")
    senses = sense_matrices(g)
    if max_hop == 0:
        return np.zeros((K_B, 0, g.n_atoms, g.n_atoms), dtype=np.int64)
    ops = backend or _ops
    return np.asarray(ops.walk_powers(senses, max_hop, clip))


def topo_distances(
    g: MolGraph,
    sentinel: float = D_INF,
    distance_provider: Optional[Callable[[MolGraph], np.ndarray]] = None,
) -> np.ndarray:
    """All-pairs shortest-path distances over heavy-atom bonds.

    ``distance_provider`` is the extension hook for geometric (3D) distances;
    when given it fully replaces the topological computation.
    """
    if distance_provider is not None:
        return np.asarray(distance_provider(g), dtype=np.float64)
    adjacency = (bond_order_matrix(g) > 0).astype(np.int64)
    return np.asarray(_ops.bfs_all_pairs(adjacency, float(sentinel)))


def topo_distances_reference(g: MolGraph, sentinel: float = D_INF) -> np.ndarray:
    """Pure-Python BFS, kept as an independent oracle and fallback twin."""
    adjacency = (bond_order_matrix(g) > 0).astype(np.int64)
    return np.asarray(_ops_py.bfs_all_pairs(adjacency, float(sentinel)))

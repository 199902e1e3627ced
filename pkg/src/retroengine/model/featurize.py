"""MolGraph -> tensor featurization for the encoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..chem import MolGraph, adjacency_powers, topo_distances
from .config import ModelConfig

#: Fixed element order for the element embedding table.
ELEMENTS = ("*", "B", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I", "<other>")

CHARGE_RANGE = 2  # charges clipped to [-2, 2]

#: Discrete atomic feature count (element, charge, H count, aromatic, in-ring).
N_ATOM_FEATURES = 5


def element_index(element: str) -> int:
    try:
        return ELEMENTS.index(element)
    except ValueError:
        return len(ELEMENTS) - 1


@dataclass
class GraphFeatures:
    """Structural tensors for one molecule (no learnable content)."""

    atom_features: torch.Tensor  # (N, 5) long
    degrees: torch.Tensor  # (N,) long
    walk_counts: torch.Tensor  # (K_b, K_r, N, N) long, clipped
    distances: torch.Tensor  # (N, N) float

    @property
    def n_atoms(self) -> int:
        return self.atom_features.shape[0]


def featurize(g: MolGraph, config: ModelConfig) -> GraphFeatures:
    n = g.n_atoms
    ring_atoms = g.ring_atoms()
    feats = np.zeros((n, N_ATOM_FEATURES), dtype=np.int64)
    degrees = np.zeros(n, dtype=np.int64)
    for i, atom in enumerate(g.atoms):
        feats[i, 0] = element_index(atom.element)
        feats[i, 1] = int(np.clip(atom.charge, -CHARGE_RANGE, CHARGE_RANGE)) + CHARGE_RANGE
        feats[i, 2] = min(atom.total_h, config.max_degree)
        feats[i, 3] = int(atom.aromatic)
        feats[i, 4] = int(i in ring_atoms)
        degrees[i] = min(g.total_degree(i), config.max_degree)
    walk = adjacency_powers(g, config.max_hop, clip=config.count_clip)
    dist = topo_distances(g, sentinel=config.d_inf)
    return GraphFeatures(
        atom_features=torch.from_numpy(feats),
        degrees=torch.from_numpy(degrees),
        walk_counts=torch.from_numpy(np.minimum(walk, config.count_clip)),
        distances=torch.from_numpy(dist),
    )

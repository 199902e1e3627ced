from .graph import AROMATIC_ORDER, BOND_SENSES, Atom, MolGraph
from .smiles import (
    canonical_order,
    canonical_smiles,
    parse_smiles,
    write_smiles,
    write_smiles_with_order,
)
from .structure import (
    BACKEND,
    COUNT_CLIP,
    D_INF,
    K_B,
    adjacency_powers,
    bond_order_matrix,
    sense_matrices,
    topo_distances,
    topo_distances_reference,
)

__all__ = [
    "AROMATIC_ORDER",
    "BOND_SENSES",
    "Atom",
    "MolGraph",
    "BACKEND",
    "COUNT_CLIP",
    "D_INF",
    "K_B",
    "adjacency_powers",
    "bond_order_matrix",
    "canonical_order",
    "canonical_smiles",
    "parse_smiles",
    "sense_matrices",
    "topo_distances",
    "topo_distances_reference",
    "write_smiles",
    "write_smiles_with_order",
]

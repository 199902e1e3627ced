"""Graph surgery: turn a product plus retro edits into reactant graphs.

Order of operations: attach leaving-group fragments (fusing each wildcard
gate onto its product atom), apply bond edits, apply hydrogen deltas, then
split into connected components.
"""

from __future__ import annotations

from typing import List

from ..chem import MolGraph, parse_smiles, write_smiles
from ..data.labels import RetroLabels
from ..errors import SurgeryError


def apply_edits(product: MolGraph, labels: RetroLabels) -> List[MolGraph]:
    """Reactant graphs implied by ``labels``, in canonical-SMILES order.

    Illegal valences do not raise; callers decide legality via
    ``MolGraph.all_valences_ok`` per returned component.  Dangling gates and
    negative hydrogen counts raise :class:`SurgeryError`.
    """
    g = product.copy()
    map_to_idx = g.map_to_index()

    # 1. Attach leaving-group fragments.
    frag_strings = labels.lg_canonical.split(".") if labels.lg_canonical else []
    offsets: List[int] = []
    wildcards: List[int] = []
    for frag_string in frag_strings:
        frag = parse_smiles(frag_string)
        offsets.append(g.n_atoms)
        for atom in frag.atoms:
            g.add_atom(atom.copy())
        for (a, b), order in frag.bonds.items():
            g.add_bond(offsets[-1] + a, offsets[-1] + b, order)

    for conn in labels.gate_connections:
        if conn.fragment_idx >= len(offsets):
            raise SurgeryError(f"gate references missing fragment {conn.fragment_idx}")
        gate = offsets[conn.fragment_idx] + conn.gate_idx
        if gate >= g.n_atoms or not g.atoms[gate].is_wildcard:
            raise SurgeryError(f"gate index {conn.gate_idx} is not a wildcard atom")
        if conn.product_map not in map_to_idx:
            raise SurgeryError(f"gate targets unknown product map {conn.product_map}")
        target = map_to_idx[conn.product_map]
        for nbr in g.neighbors(gate):
            g.add_bond(target, nbr, g.bond_order(gate, nbr))
        for nbr in list(g.neighbors(gate)):
            g.remove_bond(gate, nbr)
        wildcards.append(gate)

    dangling = [
        i
        for i in range(g.n_atoms)
        if g.atoms[i].is_wildcard and i not in wildcards
    ]
    if dangling:
        raise SurgeryError(f"dangling gate atoms {dangling} (no connection recorded)")

    # 2. Bond edits.
    for edit in labels.rc_bonds:
        if edit.u_map not in map_to_idx or edit.v_map not in map_to_idx:
            raise SurgeryError(f"bond edit references unknown maps {edit.pair}")
        u, v = map_to_idx[edit.u_map], map_to_idx[edit.v_map]
        if g.bond_order(u, v) == 0.0:
            raise SurgeryError(f"bond edit on non-bonded pair {edit.pair}")
        if edit.kind == "delete":
            g.remove_bond(u, v)
        elif edit.kind == "order":
            g.add_bond(u, v, edit.target_order)
        else:
            raise SurgeryError(f"unknown bond-edit kind {edit.kind!r}")

    # 3. Hydrogen deltas.
    for m, delta in labels.h_delta.items():
        if delta == 0:
            continue
        if m not in map_to_idx:
            raise SurgeryError(f"hydrogen delta references unknown map {m}")
        atom = g.atoms[map_to_idx[m]]
        new_h = atom.total_h + delta
        if new_h < 0:
            raise SurgeryError(f"negative hydrogen count on map {m}")
        atom.explicit_h = new_h
        atom.implicit_h = 0

    # 4. Drop fused wildcards and split into components.
    keep = [i for i in range(g.n_atoms) if i not in set(wildcards)]
    g = g.subgraph(keep)
    for i in range(g.n_atoms):
        g.atoms[i].valence_ok = g.valence_is_ok(i)
    components = [g.subgraph(comp) for comp in g.connected_components()]
    components.sort(key=lambda c: write_smiles(c, include_maps=False))
    return components

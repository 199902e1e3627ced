"""Supervision extraction: reaction centers, hydrogen deltas, leaving groups
and gate connections, derived from atom-mapped records by set difference
between product and reactant graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..chem import MolGraph, write_smiles_with_order
from ..chem.graph import Atom
from ..errors import GateError, LabelError
from .corpus import ReactionRecord

#: Maximum hydrogen change per atom; gives 2k+1 hydrogen classes.
MAX_H_CHANGE = 4

EMPTY_LG = ""


@dataclass(frozen=True)
class BondEdit:
    """Product-side bond edit, keyed by atom-map numbers (u < v)."""

    u_map: int
    v_map: int
    kind: str  # "delete" | "order"
    target_order: float = 0.0  # reactant-side order for kind == "order"

    @property
    def pair(self) -> Tuple[int, int]:
        return (self.u_map, self.v_map)


@dataclass(frozen=True)
class GateConnection:
    """One wildcard gate fused onto a product atom.

    ``fragment_idx`` / ``gate_idx`` address the wildcard inside the canonical
    leaving-group serialization: fragment position after the lexicographic
    sort, atom position in that fragment's emission (= parse) order.
    """

    product_map: int
    fragment_idx: int
    gate_idx: int
    order: float


@dataclass
class RetroLabels:
    rc_bonds: List[BondEdit] = field(default_factory=list)
    h_delta: Dict[int, int] = field(default_factory=dict)  # atom map -> delta
    lg_canonical: str = EMPTY_LG
    lg_ids: List[int] = field(default_factory=list)  # filled once a vocab exists
    gate_connections: List[GateConnection] = field(default_factory=list)

    def is_identity(self) -> bool:
        return (
            not self.rc_bonds
            and self.lg_canonical == EMPTY_LG
            and all(d == 0 for d in self.h_delta.values())
        )


def canonicalize_leaving_group(fragments: List[MolGraph]) -> Tuple[str, List[Tuple[str, List[int]]]]:
    """Canonical dot-joined serialization of leaving-group fragments.

    Returns the joined string and, per fragment in its **sorted** position,
    ``(fragment_string, emit_order)`` where ``emit_order[k]`` is the original
    atom index emitted at string position k.  Raises :class:`GateError` when
    a fragment carries no wildcard gate.
    """
    if not fragments:
        return EMPTY_LG, []
    serialized = []
    for frag in fragments:
        if not any(a.is_wildcard for a in frag.atoms):
            raise GateError("leaving-group fragment has no gate atom")
        text, order = write_smiles_with_order(frag.strip_maps(), include_maps=False)
        serialized.append((text, order, frag))
    serialized.sort(key=lambda item: item[0])
    joined = ".".join(item[0] for item in serialized)
    return joined, [(text, order) for text, order, _ in serialized]


def extract_labels(record: ReactionRecord, k: int = MAX_H_CHANGE) -> RetroLabels:
    """Derive :class:`RetroLabels` from an atom-mapped reaction record.

    Raises :class:`LabelError` for records outside the edit formalism
    (over-large hydrogen deltas, reactant-side bonds between mapped atoms
    that the product lacks, shared atoms across reactants).
    """
    product = record.product
    prod_map_to_idx = product.map_to_index()

    # Locate every mapped reactant atom; maps must be globally unique.
    reactant_map_loc: Dict[int, Tuple[int, int]] = {}
    for ri, reactant in enumerate(record.reactants):
        for ai, atom in enumerate(reactant.atoms):
            if atom.atom_map is None:
                continue
            if atom.atom_map in reactant_map_loc:
                raise LabelError(
                    f"record {record.record_id}: atom map {atom.atom_map} "
                    "appears in two reactants"
                )
            reactant_map_loc[atom.atom_map] = (ri, ai)

    missing = [m for m in prod_map_to_idx if m not in reactant_map_loc]
    if missing:
        raise LabelError(
            f"record {record.record_id}: product maps {sorted(missing)} "
            "absent from reactants"
        )

    rc_bonds: List[BondEdit] = []
    for (a, b), order in sorted(product.bonds.items()):
        ma = product.atoms[a].atom_map
        mb = product.atoms[b].atom_map
        (ra, ia) = reactant_map_loc[ma]
        (rb, ib) = reactant_map_loc[mb]
        u, v = min(ma, mb), max(ma, mb)
        if ra != rb:
            rc_bonds.append(BondEdit(u, v, "delete"))
            continue
        r_order = record.reactants[ra].bond_order(ia, ib)
        if r_order == 0.0:
            rc_bonds.append(BondEdit(u, v, "delete"))
        elif r_order != order:
            rc_bonds.append(BondEdit(u, v, "order", r_order))

    # Reactant-side bonds between two product atoms that the product lacks
    # cannot be expressed as product edits.
    for ri, reactant in enumerate(record.reactants):
        for (a, b), order in reactant.bonds.items():
            ma = reactant.atoms[a].atom_map
            mb = reactant.atoms[b].atom_map
            if ma in prod_map_to_idx and mb in prod_map_to_idx:
                pa, pb = prod_map_to_idx[ma], prod_map_to_idx[mb]
                if product.bond_order(pa, pb) == 0.0:
                    raise LabelError(
                        f"record {record.record_id}: reactant bond "
                        f"({ma},{mb}) missing from product"
                    )

    h_delta: Dict[int, int] = {}
    for m, pi in prod_map_to_idx.items():
        ri, ai = reactant_map_loc[m]
        delta = record.reactants[ri].atoms[ai].total_h - product.atoms[pi].total_h
        if abs(delta) > k:
            raise LabelError(
                f"record {record.record_id}: hydrogen delta {delta} exceeds k={k}"
            )
        h_delta[m] = delta

    fragments, frag_gates = _leaving_group_fragments(record, prod_map_to_idx)
    lg_canonical, _ = canonicalize_leaving_group(fragments)
    gate_connections = _align_gate_connections(fragments, frag_gates)

    return RetroLabels(
        rc_bonds=sorted(rc_bonds, key=lambda e: e.pair),
        h_delta=h_delta,
        lg_canonical=lg_canonical,
        gate_connections=gate_connections,
    )


def _leaving_group_fragments(
    record: ReactionRecord, prod_map_to_idx: Dict[int, int]
) -> Tuple[List[MolGraph], List[List[Tuple[int, int, float]]]]:
    """Cut leaving-group fragments out of the reactants.

    Returns fragment graphs (wildcard gates substituted at cut points) and,
    per fragment, a list of ``(wildcard_atom_idx, product_map, order)``.
    Reactant components with no product atoms and no gate bond are reagents
    and get dropped.
    """
    fragments: List[MolGraph] = []
    gates: List[List[Tuple[int, int, float]]] = []
    for reactant in record.reactants:
        lg_atoms = [
            i
            for i, atom in enumerate(reactant.atoms)
            if atom.atom_map is None or atom.atom_map not in prod_map_to_idx
        ]
        if not lg_atoms:
            continue
        lg_set = set(lg_atoms)
        # Components of the LG-only subgraph.
        comp_of: Dict[int, int] = {}
        comps: List[List[int]] = []
        for start in lg_atoms:
            if start in comp_of:
                continue
            stack = [start]
            comp: List[int] = []
            while stack:
                v = stack.pop()
                if v in comp_of:
                    continue
                comp_of[v] = len(comps)
                comp.append(v)
                stack.extend(u for u in reactant.neighbors(v) if u in lg_set)
            comps.append(sorted(comp))
        for comp in comps:
            frag = MolGraph()
            local = {}
            for i in comp:
                local[i] = frag.add_atom(reactant.atoms[i].copy())
                frag.atoms[local[i]].atom_map = None
            frag_gates: List[Tuple[int, int, float]] = []
            for i in comp:
                for j in reactant.neighbors(i):
                    order = reactant.bond_order(i, j)
                    if j in lg_set:
                        if comp_of.get(j) == comp_of[i] and j > i:
                            frag.add_bond(local[i], local[j], order)
                    else:
                        # Cut bond to a mapped (product) atom: wildcard gate.
                        gate = frag.add_atom(Atom(element="*", is_wildcard=True))
                        frag.add_bond(local[i], gate, order)
                        frag_gates.append(
                            (gate, reactant.atoms[j].atom_map, order)
                        )
            if not frag_gates:
                continue  # reagent: contributes nothing to the product
            fragments.append(frag)
            gates.append(frag_gates)
    return fragments, gates


def _align_gate_connections(
    fragments: List[MolGraph],
    frag_gates: List[List[Tuple[int, int, float]]],
) -> List[GateConnection]:
    """Express gate bookkeeping in canonical-entry coordinates."""
    if not fragments:
        return []
    # Re-serialize each original fragment to match it to its sorted slot.
    # Identical fragments are tie-broken by their gates' product maps so the
    # labels are invariant under reactant/atom permutation.
    keyed = []
    for frag, gate_list in zip(fragments, frag_gates):
        text, order = write_smiles_with_order(frag.strip_maps(), include_maps=False)
        keyed.append((text, order, gate_list))
    keyed.sort(key=lambda item: (item[0], sorted(g[1] for g in item[2])))
    out: List[GateConnection] = []
    for frag_idx, (text, emit_order, gate_list) in enumerate(keyed):
        pos_of = {orig: pos for pos, orig in enumerate(emit_order)}
        for gate_atom, product_map, order in gate_list:
            out.append(
                GateConnection(
                    product_map=product_map,
                    fragment_idx=frag_idx,
                    gate_idx=pos_of[gate_atom],
                    order=order,
                )
            )
    out.sort(key=lambda c: (c.fragment_idx, c.gate_idx))
    return out

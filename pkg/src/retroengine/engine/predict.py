"""Single-step retrosynthesis decisions.

A prediction is a joint assignment over four probabilistic choices — leaving
group, gate connections, bond changes, hydrogen changes — scored by the sum
of their negative log probabilities (the energy).  The fifth action,
initializing (detaching the chosen leaving group), involves no choice and
contributes zero energy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import torch

from ..chem import MolGraph, parse_smiles, write_smiles
from ..data import BondEdit, EMPTY_LG, GateConnection, RetroLabels, extract_labels
from ..data.corpus import ReactionRecord
from ..errors import EmptyBeamError, LabelError
from ..model.model import HeadTensors
from .surgery import apply_edits

#: The five decision-process actions, in application order.
ACTION_ORDER = (
    "lg_matching",
    "initializing",
    "lg_connecting",
    "bond_changing",
    "hydrogen_changing",
)

PROB_FLOOR = 1e-12


def neg_ln(p: float) -> float:
    return -math.log(max(float(p), PROB_FLOOR))


@dataclass(frozen=True)
class EnergyTrace:
    """Per-action energies E_a = -ln(p of the chosen condition)."""

    lg_matching: float
    lg_connecting: float
    bond_changing: float
    hydrogen_changing: float
    initializing: float = 0.0

    @property
    def total(self) -> float:
        return (
            self.lg_matching
            + self.initializing
            + self.lg_connecting
            + self.bond_changing
            + self.hydrogen_changing
        )

    @property
    def deltas(self) -> Dict[str, float]:
        """Fig-style numbered deltas: LG choice, connection, bonds, fitness."""
        return {
            "dE1": self.lg_matching,
            "dE2": self.lg_connecting,
            "dE3": self.bond_changing,
            "dE4": self.hydrogen_changing,
        }

    @property
    def cumulative(self) -> List[float]:
        running, profile = 0.0, []
        for action in ACTION_ORDER:
            running += getattr(self, action)
            profile.append(running)
        return profile

    def to_dict(self) -> Dict[str, float]:
        d = {action: getattr(self, action) for action in ACTION_ORDER}
        d["total"] = self.total
        return d


@dataclass
class Candidate:
    reactants: List[MolGraph]
    reactant_smiles: Tuple[str, ...]  # map-free canonical, sorted
    lg_id: int
    lg_canonical: str
    labels: RetroLabels  # the applied edits
    trace: EnergyTrace
    legal: bool
    rank: Optional[int] = None


@dataclass
class BeamConfig:
    n_lg: int = 10
    n_conn: int = 4
    n_bond: int = 4
    k_out: int = 10

    def __post_init__(self) -> None:
        for name in ("n_lg", "n_conn", "n_bond", "k_out"):
            if getattr(self, name) < 1:
                raise ValueError(f"beam parameter {name} must be >= 1")


def gate_addresses(lg_canonical: str) -> List[Tuple[int, int, float]]:
    """(fragment_idx, atom-position, cut-bond order) of each wildcard gate,
    in global gate order (ascending atom index over the dot-joined parse)."""
    addresses = []
    for f_idx, frag in enumerate(lg_canonical.split(".") if lg_canonical else []):
        g = parse_smiles(frag)
        for a_idx, atom in enumerate(g.atoms):
            if atom.is_wildcard:
                nbrs = list(g.neighbors(a_idx))
                order = g.bond_order(a_idx, nbrs[0]) if nbrs else 1.0
                addresses.append((f_idx, a_idx, order))
    return addresses


def score_assignment(
    tensors: HeadTensors,
    lg_id: int,
    gate_targets: Sequence[int],
    p_conn: Optional[torch.Tensor],
    bond_pairs: FrozenSet[Tuple[int, int]],
    candidate_pairs: Sequence[Tuple[int, int]],
    h_classes: Sequence[int],
) -> EnergyTrace:
    """Energy of one full joint assignment.

    Shared by prediction and query evaluation so identical choices yield
    bitwise-identical traces.
    """
    e_lgm = neg_ln(tensors.lg_probs[lg_id].item())
    e_lgc = 0.0
    for g_idx, target in enumerate(gate_targets):
        if p_conn is None:
            raise LabelError("gate targets given for the empty leaving group")
        e_lgc += neg_ln(p_conn[g_idx, target].item())
    e_bond = 0.0
    for pair in candidate_pairs:
        p = tensors.p_bond[pair[0], pair[1]].item()
        e_bond += neg_ln(p) if pair in bond_pairs else neg_ln(1.0 - p)
    e_hydro = 0.0
    for v, cls in enumerate(h_classes):
        e_hydro += neg_ln(tensors.p_hydro[v, cls].item())
    return EnergyTrace(
        lg_matching=e_lgm,
        lg_connecting=e_lgc,
        bond_changing=e_bond,
        hydrogen_changing=e_hydro,
    )


def _ensure_maps(g: MolGraph) -> MolGraph:
    """Copy with atom maps assigned (index + 1) when any are missing."""
    if all(a.atom_map is not None for a in g.atoms):
        return g
    g = g.copy()
    for i, atom in enumerate(g.atoms):
        atom.atom_map = i + 1
    return g


def _bond_variants(
    tensors: HeadTensors,
    candidate_pairs: List[Tuple[int, int]],
    n_bond: int,
    greedy: bool,
) -> List[FrozenSet[Tuple[int, int]]]:
    """Seed set {p >= 0.5} plus Hamming-1 neighbors, ranked by joint
    probability, top ``n_bond``."""
    seed = frozenset(
        p for p in candidate_pairs if tensors.p_bond[p[0], p[1]].item() >= 0.5
    )
    if greedy:
        return [seed]
    variants = {seed}
    for pair in candidate_pairs:
        variants.add(seed ^ {pair})

    def joint_ln(subset: FrozenSet[Tuple[int, int]]) -> float:
        total = 0.0
        for pair in candidate_pairs:
            p = tensors.p_bond[pair[0], pair[1]].item()
            total -= neg_ln(p) if pair in subset else neg_ln(1.0 - p)
        return total

    ranked = sorted(variants, key=lambda s: (-joint_ln(s), sorted(s)))
    return ranked[:n_bond]


def _gate_assignments(
    p_conn: Optional[torch.Tensor], n_conn: int, greedy: bool
) -> List[Tuple[int, ...]]:
    """Top joint gate->product-atom assignments by probability product."""
    if p_conn is None:
        return [()]
    n_gates, n_atoms = p_conn.shape
    per_gate: List[List[int]] = []
    for g_idx in range(n_gates):
        order = torch.argsort(p_conn[g_idx], descending=True, stable=True)
        per_gate.append(order[: (1 if greedy else min(n_conn, n_atoms))].tolist())

    def joint_ln(assign: Tuple[int, ...]) -> float:
        return -sum(neg_ln(p_conn[g, a].item()) for g, a in enumerate(assign))

    combos = [tuple(c) for c in itertools.product(*per_gate)]
    combos.sort(key=lambda c: (-joint_ln(c), c))
    return combos[: (1 if greedy else n_conn)]


def _component_valence_ok(components: List[MolGraph]) -> List[Tuple[int, int]]:
    """(component, atom) pairs failing the valence check."""
    bad = []
    for c_idx, comp in enumerate(components):
        for a_idx in range(comp.n_atoms):
            if not comp.valence_is_ok(a_idx):
                bad.append((c_idx, a_idx))
    return bad


def _try_hydrogen_repair(
    product: MolGraph,
    labels: RetroLabels,
    h_classes: List[int],
    tensors: HeadTensors,
    k: int,
) -> Optional[Tuple[List[MolGraph], List[int], RetroLabels]]:
    """Adjust hydrogen classes within +/-1 of their current choice until all
    reactant valences pass; None when no bounded repair exists."""
    map_to_idx = product.map_to_index()
    components = apply_edits(product, labels)
    bad = _component_valence_ok(components)
    if not bad:
        return components, h_classes, labels
    h_classes = list(h_classes)
    changed = False
    for c_idx, a_idx in bad:
        atom = components[c_idx].atoms[a_idx]
        if atom.atom_map is None or atom.atom_map not in map_to_idx:
            return None  # leaving-group atom: not repairable via hydrogens
        v = map_to_idx[atom.atom_map]
        base_cls = h_classes[v]
        options = []
        for dc in (1, -1):
            cls = base_cls + dc
            if not 0 <= cls <= 2 * k:
                continue
            new_h = atom.total_h + dc
            if new_h < 0:
                continue
            probe = atom.copy()
            probe.explicit_h, probe.implicit_h = new_h, 0
            saved = components[c_idx].atoms[a_idx]
            components[c_idx].atoms[a_idx] = probe
            ok = components[c_idx].valence_is_ok(a_idx)
            components[c_idx].atoms[a_idx] = saved
            if ok:
                options.append((tensors.p_hydro[v, cls].item(), cls))
        if not options:
            return None
        options.sort(reverse=True)
        h_classes[v] = options[0][1]
        changed = True
    if not changed:
        return None
    new_labels = RetroLabels(
        rc_bonds=list(labels.rc_bonds),
        h_delta={
            product.atoms[v].atom_map: h_classes[v] - k
            for v in range(product.n_atoms)
            if h_classes[v] != k
        },
        lg_canonical=labels.lg_canonical,
        lg_ids=list(labels.lg_ids),
        gate_connections=list(labels.gate_connections),
    )
    components = apply_edits(product, new_labels)
    if _component_valence_ok(components):
        return None
    return components, h_classes, new_labels


MAX_EDIT_VARIANTS = 6


def _edit_variants(
    product: MolGraph, bond_set: FrozenSet[Tuple[int, int]]
) -> List[List[BondEdit]]:
    """Bond-edit readings of one change set.

    The change head only says *which* bonds change; the reactant-side order
    is unknown.  Each changed bond may be deleted, incremented (retro
    reductions) or decremented; the combinations are capped, all-delete
    first.
    """

    def options(pair: Tuple[int, int]) -> List[BondEdit]:
        i, j = pair
        u_map, v_map = product.atoms[i].atom_map, product.atoms[j].atom_map
        order = product.bond_order(i, j)
        out = [BondEdit(u_map=u_map, v_map=v_map, kind="delete")]
        if order <= 2.0:
            out.append(
                BondEdit(u_map=u_map, v_map=v_map, kind="order", target_order=order + 1.0)
            )
        if order >= 2.0:
            out.append(
                BondEdit(u_map=u_map, v_map=v_map, kind="order", target_order=order - 1.0)
            )
        return out

    pairs = sorted(bond_set)
    variants = [
        list(combo) for combo in itertools.product(*(options(p) for p in pairs))
    ]
    return variants[:MAX_EDIT_VARIANTS] if pairs else [[]]


def predict_single_step(
    product: MolGraph,
    model,
    reaction_type: Optional[int] = None,
    beam: Optional[BeamConfig] = None,
    greedy: bool = False,
) -> List[Candidate]:
    """Ranked legal reactant candidates for one product."""
    beam = beam or BeamConfig()
    product = _ensure_maps(product)
    model.eval()
    k = model.config.k_hydrogen
    with torch.no_grad():
        tensors = model.head_tensors(product, reaction_type)
        candidate_pairs = sorted(product.bonds)
        bond_variants = _bond_variants(tensors, candidate_pairs, beam.n_bond, greedy)
        base_classes = tensors.p_hydro.argmax(dim=-1).tolist()
        lg_order = torch.argsort(tensors.lg_probs, descending=True, stable=True)
        lg_ids = lg_order[: min(beam.n_lg, len(model.vocab))].tolist()

        results: List[Candidate] = []
        seen: set = set()
        for lg_id in lg_ids:
            lg_text = model.vocab.entries[lg_id].canonical
            addresses = gate_addresses(lg_text)
            p_conn = model.conn_probs(tensors, lg_id)
            for gates in _gate_assignments(p_conn, beam.n_conn, greedy):
                conns = [
                    GateConnection(
                        product_map=product.atoms[target].atom_map,
                        fragment_idx=addresses[g_idx][0],
                        gate_idx=addresses[g_idx][1],
                        order=addresses[g_idx][2],
                    )
                    for g_idx, target in enumerate(gates)
                ]
                for bond_set in bond_variants:
                    for rc_bonds in _edit_variants(product, bond_set):
                        labels = RetroLabels(
                            rc_bonds=rc_bonds,
                            h_delta={
                                product.atoms[v].atom_map: cls - k
                                for v, cls in enumerate(base_classes)
                                if cls != k
                            },
                            lg_canonical=lg_text,
                            lg_ids=[lg_id],
                            gate_connections=conns,
                        )
                        try:
                            repaired = _try_hydrogen_repair(
                                product, labels, list(base_classes), tensors, k
                            )
                        except Exception:
                            repaired = None
                        if repaired is None:
                            continue
                        components, h_classes, labels = repaired
                        smiles = tuple(
                            sorted(
                                write_smiles(c, include_maps=False)
                                for c in components
                            )
                        )
                        key = (
                            lg_id,
                            gates,
                            tuple(
                                (e.u_map, e.v_map, e.kind, e.target_order)
                                for e in labels.rc_bonds
                            ),
                            tuple(h_classes),
                        )
                        if key in seen:
                            continue
                        seen.add(key)
                        trace = score_assignment(
                            tensors,
                            lg_id,
                            gates,
                            p_conn,
                            bond_set,
                            candidate_pairs,
                            h_classes,
                        )
                        results.append(
                            Candidate(
                                reactants=components,
                                reactant_smiles=smiles,
                                lg_id=lg_id,
                                lg_canonical=lg_text,
                                labels=labels,
                                trace=trace,
                                legal=True,
                            )
                        )
    if not results:
        raise EmptyBeamError(
            f"no legal candidate for {write_smiles(product, include_maps=False)}"
        )
    results.sort(key=lambda c: (c.trace.total, c.reactant_smiles))
    deduped: List[Candidate] = []
    seen_smiles: set = set()
    for cand in results:
        if cand.reactant_smiles in seen_smiles:
            continue
        seen_smiles.add(cand.reactant_smiles)
        cand.rank = len(deduped) + 1
        deduped.append(cand)
        if len(deduped) >= beam.k_out:
            break
    return deduped


def evaluate_query(
    product: MolGraph,
    proposed_reactants: List[MolGraph],
    model,
    reaction_type: Optional[int] = None,
) -> EnergyTrace:
    """Score a user-proposed disconnection under the model.

    Raises LabelError when the proposal is outside the edit formalism or its
    leaving group is absent from the vocabulary (not scorable).
    """
    product = _ensure_maps(product)
    record = ReactionRecord(
        record_id="query",
        reaction_class=reaction_type,
        product=product,
        reactants=proposed_reactants,
    )
    labels = extract_labels(record, k=model.config.k_hydrogen)
    lg_id = model.vocab.lookup(labels.lg_canonical)
    if lg_id is None:
        raise LabelError(
            f"leaving group {labels.lg_canonical!r} not in vocabulary (not scorable)"
        )
    model.eval()
    k = model.config.k_hydrogen
    map_to_idx = product.map_to_index()
    with torch.no_grad():
        tensors = model.head_tensors(product, reaction_type)
        candidate_pairs = sorted(product.bonds)
        bond_set = frozenset(
            tuple(sorted((map_to_idx[e.u_map], map_to_idx[e.v_map])))
            for e in labels.rc_bonds
        )
        h_classes = [k] * product.n_atoms
        for amap, delta in labels.h_delta.items():
            h_classes[map_to_idx[amap]] = delta + k
        conns = sorted(
            labels.gate_connections, key=lambda c: (c.fragment_idx, c.gate_idx)
        )
        gates = tuple(map_to_idx[c.product_map] for c in conns)
        p_conn = model.conn_probs(tensors, lg_id)
        return score_assignment(
            tensors, lg_id, gates, p_conn, bond_set, candidate_pairs, h_classes
        )

"""SMILES subset parser and deterministic (canonical) writer.

Supported subset: organic-subset atoms B C N O P S F Cl Br I, aromatic
lowercase forms, bracket atoms with charge / H-count / atom-map, bonds
``- = # :``, branches, ring closures (digits and %nn), dot-separated
fragments and the wildcard ``*``.  Stereo markers (``@ / \\``) are accepted
and ignored with a warning.
"""

from __future__ import annotations

import re
import warnings
from typing import Dict, List, Optional, Tuple

from ..errors import SmilesSyntaxError
from .graph import AROMATIC_ORDER, Atom, MolGraph

_TWO_LETTER = ("Cl", "Br")
_PLAIN = set("BCNOPSFI")
_AROMATIC = set("bcnops")
_BOND_SYMBOLS = {"-": 1.0, "=": 2.0, "#": 3.0, ":": AROMATIC_ORDER}

_BRACKET_RE = re.compile(
    r"""\[
        (?P<isotope>\d+)?
        (?P<symbol>Cl|Br|[BCNOPSFI]|[bcnops]|\*)
        (?P<stereo>@{1,2})?
        (?P<hcount>H\d*)?
        (?P<charge>\+\+|--|[+-]\d*)?
        (?::(?P<map>\d+))?
        \]""",
    re.VERBOSE,
)


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string into a valence-checked :class:`MolGraph`."""
    g = MolGraph()
    bracket_flags: List[bool] = []
    prev: Optional[int] = None
    branch_stack: List[Optional[int]] = []
    pending_bond: Optional[float] = None
    pending_offset = 0
    # ring closure number -> (atom index, bond order or None, offset)
    open_rings: Dict[int, Tuple[int, Optional[float], int]] = {}

    def add_atom(atom: Atom, is_bracket: bool, offset: int) -> None:
        nonlocal prev, pending_bond
        idx = g.add_atom(atom)
        bracket_flags.append(is_bracket)
        if prev is not None:
            order = pending_bond
            if order is None:
                both_aromatic = g.atoms[prev].aromatic and atom.aromatic
                order = AROMATIC_ORDER if both_aromatic else 1.0
            g.add_bond(prev, idx, order)
        pending_bond = None
        prev = idx

    def close_ring(number: int, offset: int) -> None:
        nonlocal pending_bond
        if prev is None:
            raise SmilesSyntaxError("ring closure before any atom", offset)
        if number in open_rings:
            other, other_bond, _ = open_rings.pop(number)
            if other == prev:
                raise SmilesSyntaxError("ring closure to the same atom", offset)
            order = pending_bond if pending_bond is not None else other_bond
            if pending_bond is not None and other_bond is not None and pending_bond != other_bond:
                raise SmilesSyntaxError("conflicting ring-closure bond symbols", offset)
            if order is None:
                both_aromatic = g.atoms[other].aromatic and g.atoms[prev].aromatic
                order = AROMATIC_ORDER if both_aromatic else 1.0
            g.add_bond(other, prev, order)
        else:
            open_rings[number] = (prev, pending_bond, offset)
        pending_bond = None

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            m = _BRACKET_RE.match(text, i)
            if not m:
                raise SmilesSyntaxError("malformed bracket atom", i)
            if m.group("isotope"):
                warnings.warn(f"isotope label ignored at offset {i}")
            if m.group("stereo"):
                warnings.warn(f"stereo marker ignored at offset {i}")
            symbol = m.group("symbol")
            aromatic = symbol.islower() and symbol != "*"
            element = "*" if symbol == "*" else symbol.capitalize() if len(symbol) == 1 else symbol
            hcount = 0
            if m.group("hcount"):
                digits = m.group("hcount")[1:]
                hcount = int(digits) if digits else 1
            charge = 0
            cgroup = m.group("charge")
            if cgroup:
                if cgroup in ("++", "--"):
                    charge = 2 if cgroup == "++" else -2
                else:
                    mag = int(cgroup[1:]) if len(cgroup) > 1 else 1
                    charge = mag if cgroup[0] == "+" else -mag
            amap = int(m.group("map")) if m.group("map") else None
            add_atom(
                Atom(
                    element=element,
                    charge=charge,
                    explicit_h=hcount,
                    aromatic=aromatic,
                    atom_map=amap,
                    is_wildcard=(symbol == "*"),
                ),
                is_bracket=True,
                offset=i,
            )
            i = m.end()
        elif text.startswith(_TWO_LETTER[0], i) or text.startswith(_TWO_LETTER[1], i):
            add_atom(Atom(element=text[i : i + 2]), is_bracket=False, offset=i)
            i += 2
        elif ch in _PLAIN:
            add_atom(Atom(element=ch), is_bracket=False, offset=i)
            i += 1
        elif ch in _AROMATIC:
            add_atom(Atom(element=ch.upper(), aromatic=True), is_bracket=False, offset=i)
            i += 1
        elif ch == "*":
            add_atom(Atom(element="*", is_wildcard=True), is_bracket=False, offset=i)
            i += 1
        elif ch in _BOND_SYMBOLS:
            if pending_bond is not None:
                raise SmilesSyntaxError("two consecutive bond symbols", i)
            pending_bond = _BOND_SYMBOLS[ch]
            pending_offset = i
            i += 1
        elif ch in "/\\":
            warnings.warn(f"stereo bond marker ignored at offset {i}")
            i += 1
        elif ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch before any atom", i)
            branch_stack.append(prev)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unmatched closing branch", i)
            prev = branch_stack.pop()
            i += 1
        elif ch == ".":
            if pending_bond is not None:
                raise SmilesSyntaxError("bond symbol before fragment separator", pending_offset)
            prev = None
            i += 1
        elif ch.isdigit():
            close_ring(int(ch), i)
            i += 1
        elif ch == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise SmilesSyntaxError("malformed %nn ring closure", i)
            close_ring(int(text[i + 1 : i + 3]), i)
            i += 3
        else:
            raise SmilesSyntaxError(f"unknown token {ch!r}", i)

    if branch_stack:
        raise SmilesSyntaxError("unclosed branch", n)
    if open_rings:
        number, (_, _, offset) = next(iter(open_rings.items()))
        raise SmilesSyntaxError(f"unclosed ring {number}", offset)
    if pending_bond is not None:
        raise SmilesSyntaxError("dangling bond symbol", pending_offset)
    if not g.atoms:
        raise SmilesSyntaxError("empty SMILES", 0)

    g.assign_implicit_hydrogens(bracket_flags)
    return g


# ---------------------------------------------------------------------------
# Canonical ordering
# ---------------------------------------------------------------------------


def _initial_invariants(g: MolGraph) -> List[tuple]:
    inv = []
    for i, atom in enumerate(g.atoms):
        inv.append(
            (
                0 if atom.is_wildcard else 1,  # gate atoms rank first
                atom.element,
                g.heavy_degree(i),
                atom.charge,
                atom.total_h,
                atom.aromatic,
            )
        )
    return inv


def _refine(g: MolGraph, colors: List[int]) -> List[int]:
    """Weisfeiler-Lehman color refinement until the partition is stable."""
    n = len(g.atoms)
    while True:
        keys = []
        for i in range(n):
            nbr = sorted((g.bond_order(i, j), colors[j]) for j in g.neighbors(i))
            keys.append((colors[i], tuple(nbr)))
        ranking = {k: r for r, k in enumerate(sorted(set(keys)))}
        new_colors = [ranking[k] for k in keys]
        if len(set(new_colors)) == len(set(colors)):
            return new_colors
        colors = new_colors


def canonical_order(g: MolGraph) -> List[int]:
    """Atom order invariant under input permutation (atom maps ignored)."""
    inv = _initial_invariants(g)
    ranking = {k: r for r, k in enumerate(sorted(set(inv)))}
    colors = _refine(g, [ranking[k] for k in inv])
    return _break_ties(g, colors)


def _break_ties(g: MolGraph, colors: List[int]) -> List[int]:
    n = len(g.atoms)
    classes: Dict[int, List[int]] = {}
    for i, c in enumerate(colors):
        classes.setdefault(c, []).append(i)
    tied = sorted(c for c, members in classes.items() if len(members) > 1)
    if not tied:
        return sorted(range(n), key=lambda i: colors[i])
    target = classes[tied[0]]
    best_key = None
    best_order = None
    for a in target:
        # Individualize a, renumber colors densely, refine, recurse.
        bumped = [2 * c + (0 if i == a else 1) for i, c in enumerate(colors)]
        ranking = {k: r for r, k in enumerate(sorted(set(bumped)))}
        order = _break_ties(g, _refine(g, [ranking[k] for k in bumped]))
        key = _serialize(g, order, include_maps=False)
        if best_key is None or key < best_key:
            best_key = key
            best_order = order
    return best_order


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def _charge_token(charge: int) -> str:
    if charge == 0:
        return ""
    sign = "+" if charge > 0 else "-"
    mag = abs(charge)
    return sign if mag == 1 else f"{sign}{mag}"


def _atom_token(g: MolGraph, i: int, include_maps: bool) -> str:
    atom = g.atoms[i]
    symbol = "*" if atom.is_wildcard else atom.element
    if atom.aromatic and not atom.is_wildcard:
        symbol = symbol.lower()
    show_map = include_maps and atom.atom_map is not None
    # H count must be spelled out whenever the parser would infer differently.
    h_mismatch = (not atom.is_wildcard) and g.infer_implicit_h(i) != atom.total_h
    needs_bracket = atom.charge != 0 or show_map or h_mismatch
    if not needs_bracket:
        return symbol
    h = atom.total_h
    htok = "" if h == 0 else ("H" if h == 1 else f"H{h}")
    maptok = f":{atom.atom_map}" if show_map else ""
    return f"[{symbol}{htok}{_charge_token(atom.charge)}{maptok}]"


def _bond_token(g: MolGraph, i: int, j: int) -> str:
    order = g.bond_order(i, j)
    both_aromatic = g.atoms[i].aromatic and g.atoms[j].aromatic
    if order == 1.0:
        return "-" if both_aromatic else ""
    if order == AROMATIC_ORDER:
        return "" if both_aromatic else ":"
    if order == 2.0:
        return "="
    if order == 3.0:
        return "#"
    raise ValueError(f"cannot serialize bond order {order}")


def _closure_token(number: int) -> str:
    return str(number) if number < 10 else f"%{number:02d}"


def _serialize_component(
    g: MolGraph, component: List[int], rank: Dict[int, int], include_maps: bool
) -> Tuple[str, List[int]]:
    start = min(component, key=lambda i: rank[i])
    visited = set()
    tree_edges = set()
    ring_bonds: List[Tuple[int, int]] = []

    # First pass: DFS (neighbors by canonical rank) to classify ring closures.
    ring_set = set()

    def classify(v: int, parent: Optional[int]) -> None:
        visited.add(v)
        for u in sorted(g.neighbors(v), key=lambda x: rank[x]):
            if u == parent:
                continue
            edge = (min(v, u), max(v, u))
            if u in visited:
                if edge not in tree_edges and edge not in ring_set:
                    ring_set.add(edge)
                    ring_bonds.append((v, u))
            else:
                tree_edges.add(edge)
                classify(u, v)

    classify(start, None)

    closure_numbers: Dict[Tuple[int, int], int] = {}
    counter = [0]

    def closures_at(v: int) -> List[Tuple[int, int]]:
        out = []
        for (a, b) in ring_bonds:
            if v in (a, b):
                out.append((min(a, b), max(a, b)))
        return out

    emitted = set()
    emit_order: List[int] = []

    def emit(v: int, parent: Optional[int]) -> str:
        emitted.add(v)
        emit_order.append(v)
        parts = [_atom_token(g, v, include_maps)]
        for edge in closures_at(v):
            if edge not in closure_numbers:
                counter[0] += 1
                closure_numbers[edge] = counter[0]
                other = edge[0] if edge[1] == v else edge[1]
                parts.append(_bond_token(g, v, other))
                parts.append(_closure_token(closure_numbers[edge]))
            else:
                parts.append(_closure_token(closure_numbers[edge]))
        children = [
            u
            for u in sorted(g.neighbors(v), key=lambda u: rank[u])
            if u != parent and (min(u, v), max(u, v)) in tree_edges and u not in emitted
        ]
        for idx, u in enumerate(children):
            sub = _bond_token(g, v, u) + emit(u, v)
            if idx < len(children) - 1:
                parts.append(f"({sub})")
            else:
                parts.append(sub)
        return "".join(parts)

    text = emit(start, None)
    return text, emit_order


def _serialize_with_order(
    g: MolGraph, order: List[int], include_maps: bool
) -> Tuple[str, List[int]]:
    rank = {atom: pos for pos, atom in enumerate(order)}
    pieces = [
        _serialize_component(g, comp, rank, include_maps)
        for comp in g.connected_components()
    ]
    pieces.sort(key=lambda item: item[0])
    text = ".".join(p[0] for p in pieces)
    emit_order = [i for p in pieces for i in p[1]]
    return text, emit_order


def _serialize(g: MolGraph, order: List[int], include_maps: bool) -> str:
    return _serialize_with_order(g, order, include_maps)[0]


def write_smiles(g: MolGraph, include_maps: bool = True) -> str:
    """Deterministic canonical serialization of ``g``."""
    return _serialize(g, canonical_order(g), include_maps)


def write_smiles_with_order(
    g: MolGraph, include_maps: bool = True
) -> Tuple[str, List[int]]:
    """Canonical serialization plus the atom emission order.

    ``emit_order[k]`` is the original index of the k-th atom in the output
    string, i.e. the atom that a fresh parse of the string puts at index k.
    """
    return _serialize_with_order(g, canonical_order(g), include_maps)


def canonical_smiles(text: str, include_maps: bool = False) -> str:
    """Parse then re-serialize; the canonical-equality comparison key."""
    return write_smiles(parse_smiles(text), include_maps=include_maps)

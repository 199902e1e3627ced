"""Attributed molecular graphs and valence bookkeeping.

Atoms carry element / charge / hydrogen counts / aromaticity / optional
atom-map numbers.  Bonds are kept in a symmetric ``(i, j) -> order`` map with
aromatic bonds recorded at order 1.5 so no kekulization is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Tuple

from ..errors import ValenceError

# Allowed valences per element; a formal charge shifts every entry by the
# charge value (N+ -> 4, O- -> 1, ...).
ALLOWED_VALENCE = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC_ELEMENTS = {"B", "C", "N", "O", "P", "S"}

#: Order value recorded for aromatic bonds (avoids kekulization).
AROMATIC_ORDER = 1.5

#: Names of the bond senses, in matrix order.
BOND_SENSES = ("sigma", "pi", "triple", "aromatic", "conjugated", "ring")


def allowed_valences(element: str, charge: int) -> Optional[Tuple[int, ...]]:
    """Charge-shifted allowed valences; ``None`` for unconstrained atoms."""
    base = ALLOWED_VALENCE.get(element)
    if base is None:
        return None
    shifted = tuple(v + charge for v in base if v + charge > 0)
    return shifted or None


@dataclass
class Atom:
    element: str
    charge: int = 0
    explicit_h: int = 0
    implicit_h: int = 0
    aromatic: bool = False
    atom_map: Optional[int] = None
    is_wildcard: bool = False
    valence_ok: bool = True

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h

    def copy(self) -> "Atom":
        return replace(self)


def _pair(i: int, j: int) -> Tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass
class MolGraph:
    """Heavy-atom molecular graph with order-typed bonds."""

    atoms: List[Atom] = field(default_factory=list)
    bonds: Dict[Tuple[int, int], float] = field(default_factory=dict)

    # -- basic structure ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def add_atom(self, atom: Atom) -> int:
        self.atoms.append(atom)
        return len(self.atoms) - 1

    def add_bond(self, i: int, j: int, order: float) -> None:
        if i == j:
            raise ValueError("self-bonds are not allowed")
        self.bonds[_pair(i, j)] = order

    def remove_bond(self, i: int, j: int) -> None:
        del self.bonds[_pair(i, j)]

    def bond_order(self, i: int, j: int) -> float:
        return self.bonds.get(_pair(i, j), 0.0)

    def neighbors(self, i: int) -> List[int]:
        out = []
        for (a, b) in self.bonds:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def heavy_degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def total_degree(self, i: int) -> int:
        """Heavy-atom neighbor count plus all attached hydrogens."""
        return self.heavy_degree(i) + self.atoms[i].total_h

    def copy(self) -> "MolGraph":
        return MolGraph([a.copy() for a in self.atoms], dict(self.bonds))

    # -- valence ------------------------------------------------------------

    def _aromatic_bond_count(self, i: int) -> int:
        return sum(1 for j in self.neighbors(i) if self.bond_order(i, j) == AROMATIC_ORDER)

    def valence_use(self, i: int) -> int:
        """Bond-order sum with each aromatic bond counted as one sigma bond."""
        total = 0
        for j in self.neighbors(i):
            order = self.bond_order(i, j)
            total += 1 if order == AROMATIC_ORDER else int(order)
        return total

    def _pi_adjust_options(self, i: int) -> Tuple[int, ...]:
        """Possible extra valence used by an aromatic atom's pi electron.

        Aromatic carbons always donate one electron from a formal double bond;
        aromatic N/P/B may be pyridine-like (donating) or pyrrole-like (lone
        pair in the ring, no extra valence); O/S never donate via a bond.
        """
        atom = self.atoms[i]
        if not atom.aromatic or self._aromatic_bond_count(i) < 2:
            return (0,)
        if atom.element == "C":
            return (1,)
        if atom.element in ("N", "P", "B"):
            return (0, 1)
        return (0,)

    def infer_implicit_h(self, i: int) -> Optional[int]:
        """Hydrogens needed to reach the smallest fitting allowed valence.

        Returns ``None`` when no allowed valence fits.  Plain aromatic N is
        assumed pyridine-like (0 H); pyrrole-type nitrogens must be written
        with an explicit H count.
        """
        atom = self.atoms[i]
        if atom.is_wildcard:
            return 0
        allowed = allowed_valences(atom.element, atom.charge)
        if allowed is None:
            return 0
        use = self.valence_use(i) + max(self._pi_adjust_options(i))
        fits = [v for v in allowed if v >= use]
        if not fits:
            return None
        return min(fits) - use

    def valence_is_ok(self, i: int) -> bool:
        """Exact valence check: bonds + hydrogens hit an allowed valence."""
        atom = self.atoms[i]
        if atom.is_wildcard:
            return True
        allowed = allowed_valences(atom.element, atom.charge)
        if allowed is None:
            return True
        base = self.valence_use(i) + atom.total_h
        return any(base + adj in allowed for adj in self._pi_adjust_options(i))

    def assign_implicit_hydrogens(self, bracket_flags: Optional[List[bool]] = None) -> None:
        """Fill implicit hydrogens for non-bracket atoms and flag bad valences.

        ``bracket_flags[i]`` marks atoms whose hydrogen count is explicit;
        those get no implicit H and only a validity flag.  Raises
        :class:`ValenceError` when a plain organic-subset atom cannot fit any
        allowed valence.
        """
        for i, atom in enumerate(self.atoms):
            explicit_count = bracket_flags[i] if bracket_flags else False
            if explicit_count or atom.is_wildcard:
                atom.implicit_h = 0
                atom.valence_ok = self.valence_is_ok(i)
                continue
            h = self.infer_implicit_h(i)
            if h is None:
                raise ValenceError(
                    f"no allowed valence fits atom {i} ({atom.element}, "
                    f"bond sum {self.valence_use(i)})"
                )
            atom.implicit_h = h
            atom.valence_ok = self.valence_is_ok(i)

    def all_valences_ok(self) -> bool:
        return all(self.valence_is_ok(i) for i in range(len(self.atoms)))

    # -- derived structure --------------------------------------------------

    def connected_components(self) -> List[List[int]]:
        seen = set()
        comps = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            stack = [start]
            comp = []
            while stack:
                v = stack.pop()
                if v in seen:
                    continue
                seen.add(v)
                comp.append(v)
                stack.extend(self.neighbors(v))
            comps.append(sorted(comp))
        return comps

    def subgraph(self, atom_indices: Iterable[int]) -> "MolGraph":
        """Induced subgraph; atom order follows ``atom_indices``."""
        idx = list(atom_indices)
        remap = {old: new for new, old in enumerate(idx)}
        sub = MolGraph([self.atoms[i].copy() for i in idx])
        for (a, b), order in self.bonds.items():
            if a in remap and b in remap:
                sub.add_bond(remap[a], remap[b], order)
        return sub

    def ring_bonds(self) -> set:
        """Bonds lying on a cycle (non-bridge edges), via DFS bridge finding."""
        n = len(self.atoms)
        adj = {i: self.neighbors(i) for i in range(n)}
        disc = [-1] * n
        low = [0] * n
        bridges = set()
        timer = [0]

        def dfs(root):
            # Iterative DFS to avoid recursion limits on long chains.
            stack = [(root, -1, iter(adj[root]))]
            disc[root] = low[root] = timer[0]
            timer[0] += 1
            while stack:
                v, parent, it = stack[-1]
                advanced = False
                for u in it:
                    if u == parent:
                        parent = -2  # allow multi-edges back (not possible here)
                        continue
                    if disc[u] == -1:
                        disc[u] = low[u] = timer[0]
                        timer[0] += 1
                        stack.append((u, v, iter(adj[u])))
                        advanced = True
                        break
                    low[v] = min(low[v], disc[u])
                if not advanced:
                    stack.pop()
                    if stack:
                        p = stack[-1][0]
                        low[p] = min(low[p], low[v])
                        if low[v] > disc[p]:
                            bridges.add(_pair(p, v))

        for i in range(n):
            if disc[i] == -1:
                dfs(i)
        return {pair for pair in self.bonds if pair not in bridges}

    def ring_atoms(self) -> set:
        atoms = set()
        for (a, b) in self.ring_bonds():
            atoms.add(a)
            atoms.add(b)
        return atoms

    # -- atom maps ----------------------------------------------------------

    def map_to_index(self) -> Dict[int, int]:
        out = {}
        for i, atom in enumerate(self.atoms):
            if atom.atom_map is not None:
                if atom.atom_map in out:
                    raise ValueError(f"duplicate atom map {atom.atom_map}")
                out[atom.atom_map] = i
        return out

    def strip_maps(self) -> "MolGraph":
        g = self.copy()
        for atom in g.atoms:
            atom.atom_map = None
        return g

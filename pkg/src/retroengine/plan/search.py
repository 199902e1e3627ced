"""Best-first AND-OR route search with energy as the step cost.

Molecule nodes are OR nodes (any one disconnection suffices); reaction
nodes are AND nodes (every reactant must be made).  The frontier pops the
open molecule node with minimal accumulated energy; the future-cost value
function defaults to zero (uniform-cost search), keeping the first solved
route provably energy-minimal within the expansion budget.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from ..chem import canonical_smiles, parse_smiles, write_smiles
from ..engine import BeamConfig, Candidate, EnergyTrace, predict_single_step
from ..errors import AlreadyExpanded, EmptyBeamError, NoRouteFound

MOLECULE = "molecule"
REACTION = "reaction"

OPEN = "open"
EXPANDED = "expanded"
SOLVED = "solved"
DEAD = "dead"


@dataclass
class BuildingBlockSet:
    """Purchasable molecules, canonical-form-invariant membership."""

    smiles: Set[str] = field(default_factory=set)
    source: str = ""

    @classmethod
    def load(cls, path) -> "BuildingBlockSet":
        out = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.add(canonical_smiles(line))
        return cls(smiles=out, source=str(path))

    def __contains__(self, smiles: str) -> bool:
        return canonical_smiles(smiles) in self.smiles

    def __len__(self) -> int:
        return len(self.smiles)


@dataclass
class RouteNode:
    node_id: int
    kind: str  # MOLECULE | REACTION
    molecule: Optional[str] = None  # canonical SMILES (molecule nodes)
    candidate: Optional[Candidate] = None  # reaction nodes
    g_cost: float = 0.0
    depth: int = 0
    status: str = OPEN
    parents: List[int] = field(default_factory=list)
    children: List[int] = field(default_factory=list)

    @property
    def energy(self) -> float:
        return self.candidate.trace.total if self.candidate else 0.0


@dataclass
class PlanLimits:
    max_expansions: int = 100
    max_depth: int = 6
    topk_per_expand: int = 5

    def __post_init__(self) -> None:
        if self.max_expansions < 0 or self.max_depth < 1 or self.topk_per_expand < 1:
            raise ValueError("plan limits must be positive (max_expansions >= 0)")


@dataclass
class RouteStep:
    product: str
    reactants: Tuple[str, ...]
    trace: EnergyTrace
    reaction_type: Optional[int] = None


@dataclass
class Route:
    steps: List[RouteStep]
    total_energy: float


class SearchSession:
    """Single search over one target; single-writer, snapshot-readable."""

    def __init__(
        self,
        target: str,
        blocks: BuildingBlockSet,
        model=None,
        limits: Optional[PlanLimits] = None,
        reaction_type: Optional[int] = None,
        predict_fn: Optional[Callable] = None,
        value_fn: Optional[Callable[[str], float]] = None,
    ):
        self.blocks = blocks
        self.model = model
        self.limits = limits or PlanLimits()
        self.default_reaction_type = reaction_type
        self.value_fn = value_fn or (lambda smiles: 0.0)
        if predict_fn is None:
            if model is None:
                raise ValueError("a model or a predict_fn is required")
            predict_fn = self._model_predict
        self.predict_fn = predict_fn
        self.nodes: Dict[int, RouteNode] = {}
        self.molecule_index: Dict[str, int] = {}
        self._ids = itertools.count()
        self._frontier: List[Tuple[float, int, int]] = []
        self._tie = itertools.count()
        self.expansions_used = 0
        self._cache: Dict[Tuple[str, Optional[int]], List[Candidate]] = {}
        self.root_id = self._molecule_node(canonical_smiles(target), depth=0, g_cost=0.0)

    # -- construction helpers ------------------------------------------------

    def _model_predict(self, smiles: str, reaction_type: Optional[int], topk: int):
        return predict_single_step(
            parse_smiles(smiles),
            self.model,
            reaction_type,
            beam=BeamConfig(k_out=topk),
        )

    def _molecule_node(self, smiles: str, depth: int, g_cost: float) -> int:
        if smiles in self.molecule_index:
            node = self.nodes[self.molecule_index[smiles]]
            improved = g_cost < node.g_cost
            node.g_cost = min(node.g_cost, g_cost)
            node.depth = min(node.depth, depth)
            if node.status == OPEN and improved:
                self._push(node)
            return node.node_id
        node = RouteNode(
            node_id=next(self._ids),
            kind=MOLECULE,
            molecule=smiles,
            g_cost=g_cost,
            depth=depth,
        )
        self.nodes[node.node_id] = node
        self.molecule_index[smiles] = node.node_id
        if smiles in self.blocks:
            node.status = SOLVED
        else:
            self._push(node)
        return node.node_id

    def _push(self, node: RouteNode) -> None:
        priority = node.g_cost + self.value_fn(node.molecule)
        heapq.heappush(self._frontier, (priority, next(self._tie), node.node_id))

    # -- expansion -----------------------------------------------------------

    def expand_node(
        self,
        node_id: int,
        reaction_type: Optional[int] = None,
        topk: Optional[int] = None,
    ) -> List[int]:
        """Expand one open molecule node; returns newly created node ids."""
        node = self.nodes.get(node_id)
        if node is None:
            raise KeyError(f"unknown node {node_id}")
        if node.kind != MOLECULE or node.status != OPEN:
            raise AlreadyExpanded(f"node {node_id} is not an open molecule node")
        if node.depth >= self.limits.max_depth:
            node.status = DEAD
            self._propagate()
            return []
        rtype = reaction_type if reaction_type is not None else self.default_reaction_type
        topk = topk or self.limits.topk_per_expand
        key = (node.molecule, rtype)
        try:
            if key not in self._cache:
                self._cache[key] = self.predict_fn(node.molecule, rtype, topk)
            candidates = self._cache[key][:topk]
        except EmptyBeamError:
            candidates = []
        self.expansions_used += 1
        node.status = EXPANDED if candidates else DEAD
        new_ids: List[int] = []
        for cand in candidates:
            # Skip degenerate self-loops (candidate equal to the node itself).
            if cand.reactant_smiles == (node.molecule,):
                continue
            rnode = RouteNode(
                node_id=next(self._ids),
                kind=REACTION,
                candidate=cand,
                g_cost=node.g_cost + cand.trace.total,
                depth=node.depth,
            )
            self.nodes[rnode.node_id] = rnode
            rnode.parents.append(node.node_id)
            node.children.append(rnode.node_id)
            new_ids.append(rnode.node_id)
            for smiles in cand.reactant_smiles:
                existed = smiles in self.molecule_index
                child_id = self._molecule_node(
                    smiles, depth=node.depth + 1, g_cost=rnode.g_cost
                )
                child = self.nodes[child_id]
                rnode.children.append(child_id)
                child.parents.append(rnode.node_id)
                if not existed:
                    new_ids.append(child_id)
        if not node.children:
            node.status = DEAD
        self._propagate()
        return new_ids

    def _propagate(self) -> None:
        """Fixpoint of the AND-OR solved/dead rules."""
        changed = True
        while changed:
            changed = False
            for node in self.nodes.values():
                if node.kind == REACTION:
                    kids = [self.nodes[c] for c in node.children]
                    if kids and all(k.status == SOLVED for k in kids):
                        new = SOLVED
                    elif any(k.status == DEAD for k in kids):
                        new = DEAD
                    else:
                        new = OPEN
                    if node.status != new:
                        node.status = new
                        changed = True
                else:
                    if node.status in (SOLVED,) or (
                        node.molecule in self.blocks
                    ):
                        continue
                    kids = [self.nodes[c] for c in node.children]
                    if any(k.status == SOLVED for k in kids):
                        if node.status != SOLVED:
                            node.status = SOLVED
                            changed = True
                    elif node.status == EXPANDED and kids and all(
                        k.status == DEAD for k in kids
                    ):
                        if node.status != DEAD:
                            node.status = DEAD
                            changed = True

    # -- route extraction ----------------------------------------------------

    def _route_cost(self, node_id: int, seen: Set[int]) -> Optional[float]:
        node = self.nodes[node_id]
        if node.molecule in self.blocks:
            return 0.0
        if node.status != SOLVED or node_id in seen:
            return None
        best = None
        for rid in node.children:
            rnode = self.nodes[rid]
            if rnode.status != SOLVED:
                continue
            total = rnode.energy
            ok = True
            for cid in rnode.children:
                sub = self._route_cost(cid, seen | {node_id})
                if sub is None:
                    ok = False
                    break
                total += sub
            if ok and (best is None or total < best):
                best = total
        return best

    def _collect_route(self, node_id: int, steps: List[RouteStep], seen: Set[int]) -> None:
        node = self.nodes[node_id]
        if node.molecule in self.blocks or node.status != SOLVED:
            return
        best_rid, best_cost = None, None
        for rid in node.children:
            rnode = self.nodes[rid]
            if rnode.status != SOLVED:
                continue
            total = rnode.energy
            ok = True
            for cid in rnode.children:
                sub = self._route_cost(cid, seen | {node_id})
                if sub is None:
                    ok = False
                    break
                total += sub
            if ok and (best_cost is None or total < best_cost):
                best_rid, best_cost = rid, total
        if best_rid is None:
            return
        rnode = self.nodes[best_rid]
        steps.append(
            RouteStep(
                product=node.molecule,
                reactants=rnode.candidate.reactant_smiles,
                trace=rnode.candidate.trace,
                reaction_type=self.default_reaction_type,
            )
        )
        for cid in rnode.children:
            self._collect_route(cid, steps, seen | {node_id})

    def best_route(self) -> Optional[Route]:
        cost = self._route_cost(self.root_id, set())
        if cost is None:
            return None
        steps: List[RouteStep] = []
        self._collect_route(self.root_id, steps, set())
        return Route(steps=steps, total_energy=cost)

    # -- top-level search ----------------------------------------------------

    @property
    def frontier_size(self) -> int:
        return sum(
            1
            for _, _, nid in self._frontier
            if self.nodes[nid].status == OPEN
        )

    def stats(self) -> Dict[str, float]:
        return {
            "expansions_used": self.expansions_used,
            "nodes": len(self.nodes),
            "frontier": self.frontier_size,
        }

    def run(self) -> Route:
        """Best-first loop; returns once no open node can beat the best
        solved route (energies are non-negative, so a node's accumulated
        cost lower-bounds any route through it)."""
        while True:
            route = self.best_route()
            node = self._peek_open()
            if route is not None:
                bound = (
                    node.g_cost + self.value_fn(node.molecule)
                    if node is not None
                    else None
                )
                if bound is None or bound >= route.total_energy - 1e-12:
                    return route
            else:
                if self.nodes[self.root_id].status == DEAD:
                    raise NoRouteFound(
                        "target is dead (no legal disconnections)", stats=self.stats()
                    )
                if node is None:
                    raise NoRouteFound("frontier exhausted", stats=self.stats())
            if self.expansions_used >= self.limits.max_expansions:
                if route is not None:
                    return route
                raise NoRouteFound("expansion budget exhausted", stats=self.stats())
            self.expand_node(node.node_id)

    def _peek_open(self) -> Optional[RouteNode]:
        while self._frontier:
            _, _, nid = self._frontier[0]
            node = self.nodes[nid]
            if node.kind == MOLECULE and node.status == OPEN:
                return node
            heapq.heappop(self._frontier)
        return None


def plan(
    target: str,
    blocks: BuildingBlockSet,
    model=None,
    limits: Optional[PlanLimits] = None,
    reaction_type: Optional[int] = None,
    predict_fn: Optional[Callable] = None,
) -> Route:
    """Find the lowest-energy route from target to building blocks."""
    session = SearchSession(
        target,
        blocks,
        model=model,
        limits=limits,
        reaction_type=reaction_type,
        predict_fn=predict_fn,
    )
    return session.run()

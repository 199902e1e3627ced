/** Pure derivation of the view model from a tree snapshot.
 *
 * The server snapshot is the single source of truth: the view model is a
 * function of (snapshot, local selection/pending state) only, so a forced
 * refresh always reproduces the view.  `mergeExpansion` bridges the gap
 * between a successful expand response and the next snapshot fetch; the
 * controller refreshes immediately after merging because expansion can also
 * update ancestor statuses and costs that the response does not carry.
 */

import type {
  ExpandResponse,
  NodeStatus,
  RouteJson,
  TreeNodeJson,
  TreeSnapshot,
} from "./types.js";

export interface LocalState {
  selected: number | null;
  pending: number[];
}

export const EMPTY_LOCAL: LocalState = { selected: null, pending: [] };

export interface EnergyBar {
  label: string;
  value: number;
}

export interface NodeView {
  id: number;
  kind: "molecule" | "reaction";
  status: NodeStatus;
  label: string;
  gCost: number;
  depth: number;
  parents: number[];
  children: number[];
  expandable: boolean;
  pending: boolean;
  selected: boolean;
  onSolvedRoute: boolean;
  energyBars: EnergyBar[];
}

export interface RouteStepView {
  product: string;
  reactants: string[];
  total: number;
  bars: EnergyBar[];
}

export interface RouteView {
  totalEnergy: number;
  steps: RouteStepView[];
}

export interface TreeViewModel {
  sessionId: string;
  rootId: number;
  empty: boolean;
  nodes: NodeView[];
  solvedRoutes: RouteView[];
  budgetRemaining: number;
  stats: Record<string, number>;
}

const DELTA_ORDER = ["dE1", "dE2", "dE3", "dE4"];

function orderedBars(deltas: Record<string, number>): EnergyBar[] {
  const keys = [
    ...DELTA_ORDER.filter((k) => k in deltas),
    ...Object.keys(deltas).filter((k) => !DELTA_ORDER.includes(k)).sort(),
  ];
  return keys.map((label) => ({ label, value: deltas[label] as number }));
}

/** Returns a human-readable reason if the payload does not look like a
 *  tree snapshot from a compatible service, else null. */
export function validateSnapshot(payload: unknown): string | null {
  if (payload === null || typeof payload !== "object") {
    return "snapshot is not an object";
  }
  const snap = payload as Partial<TreeSnapshot>;
  if (typeof snap.session_id !== "string") return "missing session_id";
  if (typeof snap.root_id !== "number") return "missing root_id";
  if (!Array.isArray(snap.nodes)) return "missing nodes array";
  if (!Array.isArray(snap.solved_routes)) return "missing solved_routes";
  if (typeof snap.budget_remaining !== "number") {
    return "missing budget_remaining";
  }
  for (const node of snap.nodes) {
    const n = node as Partial<TreeNodeJson>;
    if (typeof n.id !== "number") return "node without id";
    if (n.kind !== "molecule" && n.kind !== "reaction") {
      return `node ${n.id}: unknown kind ${String(n.kind)}`;
    }
    if (typeof n.status !== "string") return `node ${n.id}: missing status`;
  }
  return null;
}

function routeView(route: RouteJson): RouteView {
  return {
    totalEnergy: route.total_energy,
    steps: route.steps.map((s) => ({
      product: s.product,
      reactants: [...s.reactants],
      total: s.trace.total,
      bars: orderedBars(s.trace.deltas),
    })),
  };
}

export function deriveViewModel(
  snapshot: TreeSnapshot,
  local: LocalState = EMPTY_LOCAL,
): TreeViewModel {
  const pending = new Set(local.pending);
  const nodes = [...snapshot.nodes]
    .sort((a, b) => a.id - b.id)
    .map((n): NodeView => {
      const isMolecule = n.kind === "molecule";
      return {
        id: n.id,
        kind: n.kind,
        status: n.status,
        label: isMolecule ? n.molecule : n.reactants.join(" + "),
        gCost: n.g_cost,
        depth: n.depth,
        parents: [...n.parents],
        children: [...n.children],
        expandable: isMolecule && n.status === "open" && !pending.has(n.id),
        pending: pending.has(n.id),
        selected: local.selected === n.id,
        onSolvedRoute: n.status === "solved",
        energyBars: isMolecule ? [] : orderedBars(n.deltas),
      };
    });
  return {
    sessionId: snapshot.session_id,
    rootId: snapshot.root_id,
    empty: nodes.length === 0,
    nodes,
    solvedRoutes: snapshot.solved_routes.map(routeView),
    budgetRemaining: snapshot.budget_remaining,
    stats: { ...snapshot.stats },
  };
}

/** Merge a successful expand response into the last snapshot (pure).
 *
 * Contract: the expanded node and every new node in the response are the
 * authoritative post-expansion versions, so they replace/extend the node
 * set; the budget comes from the response.  Nodes not mentioned by the
 * response keep their previous values until the next refresh.
 */
export function mergeExpansion(
  snapshot: TreeSnapshot,
  resp: ExpandResponse,
): TreeSnapshot {
  const byId = new Map<number, TreeNodeJson>(
    snapshot.nodes.map((n) => [n.id, n]),
  );
  byId.set(resp.expanded.id, resp.expanded);
  for (const n of resp.new_nodes) byId.set(n.id, n);
  return {
    ...snapshot,
    nodes: [...byId.values()].sort((a, b) => a.id - b.id),
    budget_remaining: resp.budget_remaining,
  };
}

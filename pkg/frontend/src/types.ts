/** Wire types mirroring the service's JSON responses. */

export type NodeStatus = "open" | "expanded" | "solved" | "dead";

export interface EnergyTraceJson {
  total: number;
  deltas: Record<string, number>;
  actions: Record<string, number>;
}

interface NodeBase {
  id: number;
  status: NodeStatus;
  g_cost: number;
  depth: number;
  parents: number[];
  children: number[];
}

export interface MoleculeNodeJson extends NodeBase {
  kind: "molecule";
  molecule: string;
}

export interface ReactionNodeJson extends NodeBase {
  kind: "reaction";
  reactants: string[];
  energy: number;
  deltas: Record<string, number>;
}

export type TreeNodeJson = MoleculeNodeJson | ReactionNodeJson;

export interface RouteStepJson {
  product: string;
  reactants: string[];
  trace: EnergyTraceJson;
  class: number | null;
}

export interface RouteJson {
  total_energy: number;
  steps: RouteStepJson[];
}

export interface TreeSnapshot {
  session_id: string;
  root_id: number;
  nodes: TreeNodeJson[];
  solved_routes: RouteJson[];
  budget_remaining: number;
  stats: Record<string, number>;
}

export interface CreateSessionResponse {
  session_id: string;
  root: TreeNodeJson;
  budget_remaining: number;
}

export interface ExpandResponse {
  new_nodes: TreeNodeJson[];
  expanded: TreeNodeJson;
  budget_remaining: number;
}

export interface ApiErrorDetail {
  code: string;
  message: string;
  offset?: number;
}

/** Snapshot-determines-view property on 25 recorded service snapshots. */

import { describe, expect, it } from "vitest";

import type { TreeSnapshot } from "../src/types.js";
import {
  deriveViewModel,
  validateSnapshot,
  EMPTY_LOCAL,
  LocalState,
} from "../src/viewmodel.js";
import recorded from "./fixtures/recorded.json";

const snapshots = recorded.snapshots as unknown as TreeSnapshot[];

describe("recorded corpus", () => {
  it("has exactly 25 snapshots and they all validate", () => {
    expect(snapshots).toHaveLength(25);
    for (const snap of snapshots) {
      expect(validateSnapshot(snap)).toBeNull();
    }
  });
});

describe("snapshot determines the view", () => {
  it("derivation is a pure function of (snapshot, local state)", () => {
    for (const snap of snapshots) {
      const local: LocalState = {
        selected: snap.root_id,
        pending: [],
      };
      const first = deriveViewModel(snap, local);
      // independent deep copy: no hidden state can leak between derivations
      const again = deriveViewModel(
        JSON.parse(JSON.stringify(snap)) as TreeSnapshot,
        { ...local },
      );
      expect(JSON.parse(JSON.stringify(first))).toEqual(
        JSON.parse(JSON.stringify(again)),
      );
    }
  });

  it("does not mutate the snapshot it derives from", () => {
    for (const snap of snapshots) {
      const before = JSON.parse(JSON.stringify(snap));
      deriveViewModel(snap, EMPTY_LOCAL);
      expect(snap).toEqual(before);
    }
  });

  it("mirrors every node with its status and cost", () => {
    for (const snap of snapshots) {
      const vm = deriveViewModel(snap, EMPTY_LOCAL);
      expect(vm.nodes).toHaveLength(snap.nodes.length);
      const byId = new Map(snap.nodes.map((n) => [n.id, n]));
      for (const view of vm.nodes) {
        const node = byId.get(view.id)!;
        expect(view.status).toBe(node.status);
        expect(view.gCost).toBe(node.g_cost);
        expect(view.children).toEqual(node.children);
      }
    }
  });

  it("reaction nodes carry ordered energy bars, molecules none", () => {
    for (const snap of snapshots) {
      const vm = deriveViewModel(snap, EMPTY_LOCAL);
      for (const view of vm.nodes) {
        if (view.kind === "molecule") {
          expect(view.energyBars).toEqual([]);
        } else {
          expect(view.energyBars.map((b) => b.label)).toEqual([
            "dE1",
            "dE2",
            "dE3",
            "dE4",
          ]);
        }
      }
    }
  });

  it("only open molecule nodes are expandable", () => {
    for (const snap of snapshots) {
      const vm = deriveViewModel(snap, EMPTY_LOCAL);
      for (const view of vm.nodes) {
        expect(view.expandable).toBe(
          view.kind === "molecule" && view.status === "open",
        );
      }
    }
  });

  it("pending node ids are not expandable and are flagged", () => {
    const snap = snapshots.find((s) =>
      s.nodes.some((n) => n.kind === "molecule" && n.status === "open"),
    )!;
    const open = snap.nodes.find(
      (n) => n.kind === "molecule" && n.status === "open",
    )!;
    const vm = deriveViewModel(snap, { selected: null, pending: [open.id] });
    const view = vm.nodes.find((n) => n.id === open.id)!;
    expect(view.pending).toBe(true);
    expect(view.expandable).toBe(false);
  });

  it("solved snapshots expose a highlighted route, solved leaves not expandable", () => {
    const solved = snapshots.filter((s) => s.solved_routes.length > 0);
    expect(solved.length).toBeGreaterThan(0);
    for (const snap of solved) {
      const vm = deriveViewModel(snap, EMPTY_LOCAL);
      const route = vm.solvedRoutes[0]!;
      if (route.steps.length === 0) {
        // target already in the building blocks: zero-cost route
        expect(route.totalEnergy).toBe(0);
      }
      const highlighted = vm.nodes.filter((n) => n.onSolvedRoute);
      expect(highlighted.length).toBeGreaterThan(0);
      for (const n of highlighted) expect(n.expandable).toBe(false);
    }
  });

  it("empty snapshot yields the empty-state flag, no crash", () => {
    const empty: TreeSnapshot = {
      session_id: "s",
      root_id: 0,
      nodes: [],
      solved_routes: [],
      budget_remaining: 0,
      stats: {},
    };
    const vm = deriveViewModel(empty, EMPTY_LOCAL);
    expect(vm.empty).toBe(true);
    expect(vm.nodes).toEqual([]);
  });
});

describe("schema validation", () => {
  it("rejects payloads missing required fields", () => {
    expect(validateSnapshot(null)).not.toBeNull();
    expect(validateSnapshot({})).not.toBeNull();
    expect(validateSnapshot({ session_id: "x" })).not.toBeNull();
    const bad = JSON.parse(JSON.stringify(snapshots[0])) as Record<
      string,
      unknown
    >;
    delete bad.budget_remaining;
    expect(validateSnapshot(bad)).toMatch(/budget_remaining/);
  });

  it("rejects nodes of unknown kind", () => {
    const bad = JSON.parse(JSON.stringify(snapshots[0])) as TreeSnapshot;
    (bad.nodes[0] as { kind: string }).kind = "mystery";
    expect(validateSnapshot(bad)).toMatch(/unknown kind/);
  });
});

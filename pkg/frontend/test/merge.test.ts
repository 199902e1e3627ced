/** Expand-merge correctness on recorded (before, response, after) triples. */

import { describe, expect, it } from "vitest";

import type { ExpandResponse, TreeSnapshot } from "../src/types.js";
import { mergeExpansion } from "../src/viewmodel.js";
import recorded from "./fixtures/recorded.json";

interface MergeTriple {
  before: TreeSnapshot;
  expand: ExpandResponse;
  after: TreeSnapshot;
}

const triples = recorded.merges as unknown as MergeTriple[];

describe("mergeExpansion", () => {
  it("fixture sanity: triples recorded", () => {
    expect(triples.length).toBeGreaterThanOrEqual(10);
  });

  it("merged node set matches the authoritative after-snapshot", () => {
    for (const { before, expand, after } of triples) {
      const merged = mergeExpansion(before, expand);
      const mergedIds = merged.nodes.map((n) => n.id);
      const afterIds = after.nodes.map((n) => n.id).sort((a, b) => a - b);
      expect(mergedIds).toEqual(afterIds);
      // ids unique
      expect(new Set(mergedIds).size).toBe(mergedIds.length);
    }
  });

  it("new children appear exactly as the response describes them", () => {
    for (const { before, expand, after } of triples) {
      const merged = mergeExpansion(before, expand);
      const mergedById = new Map(merged.nodes.map((n) => [n.id, n]));
      const afterById = new Map(after.nodes.map((n) => [n.id, n]));
      for (const fresh of expand.new_nodes) {
        expect(mergedById.get(fresh.id)).toEqual(fresh);
        // response is consistent with the server's own next snapshot
        expect(afterById.get(fresh.id)).toEqual(fresh);
        if (fresh.kind === "reaction") {
          expect(Object.keys(fresh.deltas).sort()).toEqual([
            "dE1",
            "dE2",
            "dE3",
            "dE4",
          ]);
        }
      }
      expect(mergedById.get(expand.expanded.id)).toEqual(expand.expanded);
      expect(afterById.get(expand.expanded.id)).toEqual(expand.expanded);
    }
  });

  it("budget tracks the response and matches the after-snapshot", () => {
    for (const { before, expand, after } of triples) {
      const merged = mergeExpansion(before, expand);
      expect(merged.budget_remaining).toBe(expand.budget_remaining);
      expect(merged.budget_remaining).toBe(after.budget_remaining);
    }
  });

  it("is pure: inputs are not mutated", () => {
    for (const { before, expand } of triples) {
      const beforeCopy = JSON.parse(JSON.stringify(before));
      const expandCopy = JSON.parse(JSON.stringify(expand));
      mergeExpansion(before, expand);
      expect(before).toEqual(beforeCopy);
      expect(expand).toEqual(expandCopy);
    }
  });
});

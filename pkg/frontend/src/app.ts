/** Session controller: owns the last snapshot, local selection/pending
 *  state, and the error banner.  All mutations go through the API client;
 *  at most one expand request is in flight per node. */

import { ApiClient, ApiError, SessionLimits } from "./api.js";
import type { TreeSnapshot } from "./types.js";
import {
  deriveViewModel,
  mergeExpansion,
  validateSnapshot,
  LocalState,
  TreeViewModel,
} from "./viewmodel.js";

export interface Banner {
  kind: "error" | "info";
  code: string;
  message: string;
}

export type ExpandOutcome =
  | "ok"
  | "suppressed"
  | "not-expandable"
  | "conflict"
  | "budget"
  | "failed";

export interface ControllerOptions {
  onChange?: () => void;
  retryAttempts?: number;
  retryBaseMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export class RouteExplorer {
  snapshot: TreeSnapshot | null = null;
  sessionId: string | null = null;
  banner: Banner | null = null;
  reactionClass: number | null = null;

  private local: LocalState = { selected: null, pending: [] };
  private inflight = new Set<number>();
  private readonly onChange: () => void;
  private readonly retryAttempts: number;
  private readonly retryBaseMs: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly api: ApiClient,
    options: ControllerOptions = {},
  ) {
    this.onChange = options.onChange ?? (() => {});
    this.retryAttempts = options.retryAttempts ?? 3;
    this.retryBaseMs = options.retryBaseMs ?? 250;
    this.sleep = options.sleep ?? defaultSleep;
  }

  get view(): TreeViewModel | null {
    return this.snapshot ? deriveViewModel(this.snapshot, this.local) : null;
  }

  select(nodeId: number | null): void {
    this.local = { ...this.local, selected: nodeId };
    this.onChange();
  }

  async start(target: string, limits?: SessionLimits): Promise<void> {
    const created = await this.api.createSession(
      target,
      limits,
      this.reactionClass,
    );
    this.sessionId = created.session_id;
    this.banner = null;
    await this.refresh();
  }

  /** Fetch the authoritative snapshot; sets a schema-mismatch banner and
   *  keeps the previous tree if the payload is unusable. */
  async refresh(): Promise<void> {
    if (this.sessionId === null) return;
    const snap = await this.api.tree(this.sessionId);
    const problem = validateSnapshot(snap);
    if (problem !== null) {
      this.banner = {
        kind: "error",
        code: "schema_mismatch",
        message: `incompatible snapshot: ${problem}`,
      };
    } else {
      this.snapshot = snap;
    }
    this.onChange();
  }

  async submitExpansion(
    nodeId: number,
    reactionClass?: number | null,
    topk?: number,
  ): Promise<ExpandOutcome> {
    if (this.sessionId === null || this.snapshot === null) return "failed";
    if (this.inflight.has(nodeId)) return "suppressed";
    const node = this.snapshot.nodes.find((n) => n.id === nodeId);
    if (!node || node.kind !== "molecule" || node.status !== "open") {
      return "not-expandable";
    }
    this.inflight.add(nodeId);
    this.local = { ...this.local, pending: [...this.inflight] };
    this.onChange();
    try {
      const resp = await this.withRetry(() =>
        this.api.expand(
          this.sessionId as string,
          nodeId,
          reactionClass ?? this.reactionClass,
          topk,
        ),
      );
      this.snapshot = mergeExpansion(this.snapshot, resp);
      this.banner = null;
      this.onChange();
      await this.refresh();
      return "ok";
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 429)) {
        this.banner = {
          kind: "error",
          code: err.detail.code,
          message: err.detail.message,
        };
        return err.status === 429 ? "budget" : "conflict";
      }
      this.banner = {
        kind: "error",
        code: err instanceof ApiError ? err.detail.code : "network",
        message:
          err instanceof ApiError
            ? err.detail.message
            : `request failed: ${String(err)}`,
      };
      return "failed";
    } finally {
      this.inflight.delete(nodeId);
      this.local = { ...this.local, pending: [...this.inflight] };
      this.onChange();
    }
  }

  dismissBanner(): void {
    this.banner = null;
    this.onChange();
  }

  /** Retry transient network failures with exponential backoff; HTTP-level
   *  errors (ApiError) are surfaced immediately. */
  private async withRetry<T>(fn: () => Promise<T>): Promise<T> {
    let lastError: unknown;
    for (let attempt = 0; attempt < this.retryAttempts; attempt++) {
      try {
        return await fn();
      } catch (err) {
        if (err instanceof ApiError) throw err;
        lastError = err;
        if (attempt + 1 < this.retryAttempts) {
          await this.sleep(this.retryBaseMs * 2 ** attempt);
        }
      }
    }
    throw lastError;
  }
}

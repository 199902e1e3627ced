/** Thin typed client over the service endpoints.
 *
 * The fetch implementation is injectable so tests can run against a mocked
 * service; all mutations go through these documented endpoints.
 */

import type {
  ApiErrorDetail,
  CreateSessionResponse,
  ExpandResponse,
  TreeSnapshot,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: ApiErrorDetail,
  ) {
    super(`${status}: ${detail.code}: ${detail.message}`);
    this.name = "ApiError";
  }
}

export interface SessionLimits {
  max_expansions?: number;
  max_depth?: number;
  topk_per_expand?: number;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (...a) => fetch(...a),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    let payload: unknown = null;
    try {
      payload = await resp.json();
    } catch {
      payload = null;
    }
    if (!resp.ok) {
      const detail = (payload as { detail?: unknown })?.detail;
      const d: ApiErrorDetail =
        detail && typeof detail === "object" && "code" in detail
          ? (detail as ApiErrorDetail)
          : { code: "http_error", message: `request failed (${resp.status})` };
      throw new ApiError(resp.status, d);
    }
    return payload as T;
  }

  createSession(
    target: string,
    limits?: SessionLimits,
    reactionClass?: number | null,
    blocksProfile?: string,
  ): Promise<CreateSessionResponse> {
    const body: Record<string, unknown> = { target };
    if (limits) body.limits = limits;
    if (reactionClass != null) body.class = reactionClass;
    if (blocksProfile) body.blocks_profile = blocksProfile;
    return this.request("POST", "/plan/session", body);
  }

  expand(
    sessionId: string,
    nodeId: number,
    reactionClass?: number | null,
    topk?: number,
  ): Promise<ExpandResponse> {
    const body: Record<string, unknown> = { node_id: nodeId };
    if (reactionClass != null) body.class = reactionClass;
    if (topk != null) body.topk = topk;
    return this.request("POST", `/plan/session/${sessionId}/expand`, body);
  }

  tree(sessionId: string): Promise<TreeSnapshot> {
    return this.request("GET", `/plan/session/${sessionId}/tree`);
  }
}

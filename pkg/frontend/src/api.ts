import type {
  DuplicateProposal,
  GraphPayload,
  LabelDecision,
  MergeDecision,
  SessionView,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
    public errors?: { field: string; message: string }[],
  ) {
    super(`${status}: ${detail}`);
  }
}

export interface ClientOptions {
  baseUrl?: string;
  token?: string;
  fetchImpl?: typeof fetch;
}

export class CurationClient {
  private baseUrl: string;
  private token?: string;
  private fetchImpl: typeof fetch;

  constructor(options: ClientOptions = {}) {
    this.baseUrl = options.baseUrl ?? "";
    this.token = options.token;
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
      ...(init?.headers as Record<string, string> | undefined),
    };
    if (this.token) headers["X-Auth-Token"] = this.token;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      ...init,
      headers,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        response.status,
        typeof body.detail === "string" ? body.detail : "request failed",
        body.errors,
      );
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/api/health");
  }

  createSession(config: {
    threshold?: number;
    k?: number;
    max_iterations?: number;
    seed?: number;
  } = {}): Promise<SessionView> {
    return this.request("/api/session", {
      method: "POST",
      body: JSON.stringify(config),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/api/session/${encodeURIComponent(sessionId)}`);
  }

  getCandidates(sessionId: string): Promise<SessionView> {
    return this.request(`/api/session/${encodeURIComponent(sessionId)}/candidates`);
  }

  iterate(sessionId: string): Promise<SessionView> {
    return this.request(`/api/session/${encodeURIComponent(sessionId)}/iterate`, {
      method: "POST",
    });
  }

  submitLabels(
    sessionId: string,
    batchId: string,
    decisions: LabelDecision[],
    idempotencyKey: string,
  ): Promise<SessionView> {
    return this.request(`/api/session/${encodeURIComponent(sessionId)}/labels`, {
      method: "POST",
      body: JSON.stringify({
        batch_id: batchId,
        idempotency_key: idempotencyKey,
        decisions,
      }),
    });
  }

  graph(center?: string, hops = 1): Promise<GraphPayload> {
    const params = new URLSearchParams();
    if (center) params.set("center", center);
    params.set("hops", String(hops));
    return this.request(`/api/graph?${params.toString()}`);
  }

  corefProposals(tau = 0.15): Promise<{ proposals: DuplicateProposal[] }> {
    return this.request(`/api/coref/proposals?tau=${tau}`);
  }

  submitCorefDecisions(
    decisions: MergeDecision[],
  ): Promise<{ confirmed: number; mappings: Record<string, string> }> {
    return this.request("/api/coref/decisions", {
      method: "POST",
      body: JSON.stringify({ decisions }),
    });
  }
}

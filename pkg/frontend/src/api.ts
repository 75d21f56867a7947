/**
 * Typed client for the session service. Every call returns parsed JSON;
 * non-2xx responses throw an ApiError carrying the service error body.
 */

export interface HistoryEntry {
  problem: string;
  action: { op: string; params: Record<string, unknown> };
  summary: Record<string, unknown>;
  timestamp: number;
}

export interface SessionView {
  id: string;
  name: string;
  notes: string;
  cursor: number;
  history: HistoryEntry[];
  snapshot: string;
}

export interface SessionSummary {
  id: string;
  name: string;
  cursor: number;
  length: number;
  updated: number;
}

export interface ActionResult {
  index: number;
  snapshot: string;
  summary: Record<string, unknown>;
}

export interface DiagramView {
  side: string;
  labels: string[];
  classes: string[][];
  edges: [string, string][];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    public baseUrl: string,
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl.replace(/\/$/, "") + path, init);
    const text = await response.text();
    const body = text ? JSON.parse(text) : {};
    if (!response.ok) {
      throw new ApiError(
        response.status,
        body.code ?? "error",
        body.message ?? response.statusText,
        body.details ?? {},
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createFromText(text: string, name = ""): Promise<SessionView> {
    return this.post("/sessions", { text, name });
  }

  createFamily(delta: number, z: number[], name = ""): Promise<SessionView> {
    return this.post("/sessions", { family: { delta, z }, name });
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("/sessions");
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  applyAction(
    id: string,
    op: string,
    params: Record<string, unknown>,
  ): Promise<ActionResult> {
    return this.post(`/sessions/${id}/actions`, { op, params });
  }

  seek(id: string, cursor: number): Promise<SessionView> {
    return this.post(`/sessions/${id}/seek`, { cursor });
  }

  fork(id: string, name = ""): Promise<SessionView> {
    return this.post(`/sessions/${id}/fork`, { name });
  }

  async diagram(id: string, side: "node" | "edge"): Promise<DiagramView> {
    const result = await this.applyAction(id, "diagram", { side });
    return (result.summary as { diagram: DiagramView }).diagram;
  }

  /** Dry-run a relaxation; the engine reports validity without recording. */
  async checkRelaxation(
    id: string,
    actions: unknown[],
  ): Promise<{ valid: boolean; reason?: string }> {
    const result = await this.applyAction(id, "relax", {
      actions,
      check_only: true,
    });
    return result.summary as { valid: boolean; reason?: string };
  }
}

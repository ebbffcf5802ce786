/** Typed client for the hypodb JSON API. All probabilities are passed
 * through untouched; the client never computes with them. */

export interface Phenomenon {
  phi: number;
  description: string;
}

export interface Hypothesis {
  phi: number;
  upsilon: number;
  name: string;
  confidence: number;
}

export interface PredictionRow {
  phi: number;
  upsilon: number;
  value: number;
  prior: number;
  posterior?: number | null;
}

export interface WorldVariable {
  id: number;
  marginals: number[];
  compound: boolean;
}

export interface HistoryEntry {
  attr: string;
  dims: Record<string, number>;
  y: number;
  sigma: number;
}

export interface ObservationRequest {
  attr: string;
  dims: Record<string, number>;
  y: number;
  sigma: number;
  phi?: number;
  commit?: boolean;
}

export interface ObserveResponse {
  committed: boolean;
  rows: PredictionRow[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Pull a human-readable message out of an error response body.  The API
 * uses {"error": ...} for engine errors and {"detail": ...} for request
 * validation. */
function errorMessage(status: number, body: unknown): string {
  if (body && typeof body === "object") {
    const record = body as Record<string, unknown>;
    if (typeof record["error"] === "string") return record["error"];
    if (typeof record["detail"] === "string") return record["detail"];
    if (record["detail"] !== undefined) return JSON.stringify(record["detail"]);
  }
  return `request failed with status ${status}`;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `network error: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON body; fall through to the status-based message
    }
    if (!response.ok) {
      throw new ApiError(response.status, errorMessage(response.status, body));
    }
    return body as T;
  }

  phenomena(): Promise<Phenomenon[]> {
    return this.request("/api/phenomena");
  }

  hypotheses(phi: number): Promise<Hypothesis[]> {
    return this.request(`/api/hypotheses?phi=${encodeURIComponent(phi)}`);
  }

  predictions(
    phi: number,
    attr: string,
    dims: Record<string, number> = {},
  ): Promise<PredictionRow[]> {
    const params = new URLSearchParams({ phi: String(phi), attr });
    for (const [key, value] of Object.entries(dims)) {
      params.set(key, String(value));
    }
    return this.request(`/api/predictions?${params.toString()}`);
  }

  worldtable(): Promise<WorldVariable[]> {
    return this.request("/api/worldtable");
  }

  history(): Promise<HistoryEntry[]> {
    return this.request("/api/history");
  }

  observe(req: ObservationRequest): Promise<ObserveResponse> {
    return this.request("/api/observe", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  reset(): Promise<{ history: HistoryEntry[] }> {
    return this.request("/api/reset", { method: "POST" });
  }
}

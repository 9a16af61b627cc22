/** Thin typed fetch wrapper around the audit service endpoints. */

import type {
  Ack,
  Judgment,
  NextResponse,
  Report,
  SessionCreated,
  SessionView,
} from "./api";

/** The server answered with a non-2xx status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** The request never reached the server (offline, refused, aborted). */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(String(cause));
    this.name = "NetworkError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AuditClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // bind lazily so a test can swap globalThis.fetch after construction
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(err);
    }
    if (!res.ok) {
      let detail = res.statusText || `HTTP ${res.status}`;
      try {
        const data: unknown = await res.json();
        if (typeof data === "object" && data !== null && "detail" in data) {
          detail = String((data as { detail: unknown }).detail);
        }
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string; dataset: string }> {
    return this.request("GET", "/health");
  }

  createSession(auditorId: string, subset?: number): Promise<SessionCreated> {
    const body: Record<string, unknown> = { auditor_id: auditorId };
    if (subset !== undefined) body.subset = subset;
    return this.request("POST", "/sessions", body);
  }

  view(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  next(sessionId: string): Promise<NextResponse> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  submit(sessionId: string, rowId: number, judgment: Judgment): Promise<Ack> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/judgments`, {
      row_id: rowId,
      ...judgment,
    });
  }

  report(sessionId: string): Promise<Report> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/report`);
  }

  async exportLog(auditorId?: string): Promise<string> {
    const query = auditorId === undefined ? "" : `?auditor_id=${encodeURIComponent(auditorId)}`;
    let res: Response;
    try {
      res = await this.fetchFn(`${this.base}/export${query}`);
    } catch (err) {
      throw new NetworkError(err);
    }
    if (!res.ok) throw new ApiError(res.status, res.statusText);
    return res.text();
  }
}

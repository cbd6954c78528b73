/** Typed client for the restoration session service.
 *
 * Every number the console displays comes out of one of these responses;
 * the client never post-processes values, it only ships JSON back and forth.
 * The fetch implementation is injectable so tests can run against a fake
 * transport or a live server interchangeably.
 */

export type BranchStatus = "U" | "E" | "D";

export interface BusDoc {
  id: string;
  kind: string;
}

export interface BranchDoc {
  index: number;
  endpoints: [string, string];
  normally_open?: boolean;
}

export interface NetworkDoc {
  name?: string;
  comment?: string;
  buses: BusDoc[];
  branches: BranchDoc[];
}

export interface HistoryEntry {
  action: number[];
  outcomes: Record<string, string>;
}

export interface SessionBody {
  id: string;
  name: string | null;
  state: string;
  value: number;
  recommendation: number[] | null;
  terminal: boolean;
  target_bus: string | null;
  history: HistoryEntry[];
  network: NetworkDoc;
  p_f: number[];
}

export interface WhatIfBody {
  successor: string;
  remaining: number;
  next_action: number[] | null;
}

export interface HealthBody {
  status: string;
  sessions: number;
}

/** Service error envelope, re-thrown with the HTTP status attached. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public path: string | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

interface ErrorEnvelope {
  error?: { code?: string; message?: string; path?: string | null };
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    public readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.baseUrl + path, init);
    } catch (exc) {
      throw new ApiError(0, "unreachable", `service unreachable: ${exc}`);
    }
    let body: unknown = null;
    const text = await res.text();
    if (text !== "") {
      try {
        body = JSON.parse(text);
      } catch {
        body = null;
      }
    }
    if (!res.ok) {
      const env = (body ?? {}) as ErrorEnvelope;
      const err = env.error ?? {};
      throw new ApiError(
        res.status,
        err.code ?? "error",
        err.message ?? `request failed with status ${res.status}`,
        err.path ?? null,
      );
    }
    return body as T;
  }

  health(): Promise<HealthBody> {
    return this.request<HealthBody>("/healthz");
  }

  /** Create a session from a scenario document.
   *
   * Accepts the raw textarea text so malformed JSON still reaches the
   * service and comes back as its own 400 rather than being pre-judged
   * client-side.
   */
  createSession(scenario: string | object): Promise<SessionBody> {
    const body =
      typeof scenario === "string" ? scenario : JSON.stringify(scenario);
    return this.request<SessionBody>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body,
    });
  }

  getSession(id: string): Promise<SessionBody> {
    return this.request<SessionBody>(`/sessions/${encodeURIComponent(id)}`);
  }

  postObservation(
    id: string,
    action: number[],
    outcomes: Record<number, BranchStatus>,
  ): Promise<SessionBody> {
    const doc = {
      action,
      outcomes: Object.fromEntries(
        Object.entries(outcomes).map(([k, v]) => [String(k), v]),
      ),
    };
    return this.request<SessionBody>(
      `/sessions/${encodeURIComponent(id)}/observations`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(doc),
      },
    );
  }

  whatIf(
    id: string,
    action: number[],
    outcomes: Record<number, BranchStatus>,
  ): Promise<WhatIfBody> {
    const actionParam = action.join(",");
    const outcomesParam = Object.entries(outcomes)
      .map(([k, v]) => `${k}=${v}`)
      .join(",");
    const query =
      `action=${encodeURIComponent(actionParam)}` +
      `&outcomes=${encodeURIComponent(outcomesParam)}`;
    return this.request<WhatIfBody>(
      `/sessions/${encodeURIComponent(id)}/whatif?${query}`,
    );
  }
}

/** API client: a tiny typed facade over fetch, plus the replay client the
 * tests use. Both implement the same interface, so the controller cannot
 * tell live traffic from a recorded tape. */

import type {
  ChoroplethBody, CumulativeBody, DatasetMeta, FilterBody, FilterRequest,
  GlobalSeriesBody, HotspotSummary, RadialBody, RankingBody, RecomputeRequest,
  RegionBody, SelectRequest, SessionInfo,
} from "./types";

export interface ApiClient {
  request(method: "GET" | "POST", path: string, body?: unknown): Promise<unknown>;
}

/** Key-stable JSON: objects serialize with sorted keys at every level. */
export function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object") return JSON.stringify(value);
  if (Array.isArray(value)) return `[${value.map(stableStringify).join(",")}]`;
  const entries = Object.entries(value as Record<string, unknown>)
    .filter(([, v]) => v !== undefined)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
  return `{${entries.join(",")}}`;
}

export class ApiError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

export class HttpClient implements ApiClient {
  constructor(private baseUrl: string, private sessionId: () => string | null) {}

  async request(method: "GET" | "POST", path: string, body?: unknown): Promise<unknown> {
    const session = this.sessionId();
    const url = this.baseUrl + path + (session ? `?session=${session}` : "");
    const response = await fetch(url, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : stableStringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(payload.code ?? "error", payload.message ?? "request failed",
        response.status);
    }
    return payload;
  }
}

interface TapeEntry {
  method: string;
  path: string;
  body: unknown;
  response: unknown;
}

/** Strict-order replay of a recorded request/response tape. Any deviation
 * from the recorded sequence (order, path or body) is an error, which pins
 * the exact traffic the controller is allowed to produce. */
export class TapeClient implements ApiClient {
  private cursor = 0;

  constructor(private tape: TapeEntry[]) {}

  get position(): number {
    return this.cursor;
  }

  get exhausted(): boolean {
    return this.cursor >= this.tape.length;
  }

  async request(method: "GET" | "POST", path: string, body?: unknown): Promise<unknown> {
    const expected = this.tape[this.cursor];
    if (!expected) {
      throw new Error(`tape exhausted: unexpected ${method} ${path}`);
    }
    const wantBody = expected.body === null ? undefined : expected.body;
    if (expected.method !== method || expected.path !== path ||
        stableStringify(wantBody) !== stableStringify(body)) {
      throw new Error(
        `tape mismatch at ${this.cursor}: recorded ${expected.method} ${expected.path} ` +
        `${stableStringify(wantBody)}, got ${method} ${path} ${stableStringify(body)}`);
    }
    this.cursor += 1;
    return structuredClone(expected.response);
  }
}

/** Thin typed wrappers; every endpoint of the service in one place. */
export class Api {
  constructor(private client: ApiClient) {}

  createSession(dataset?: string): Promise<SessionInfo> {
    return this.client.request("POST", "/session", dataset ? { dataset } : {}) as Promise<SessionInfo>;
  }

  meta(): Promise<DatasetMeta> {
    return this.client.request("GET", "/meta") as Promise<DatasetMeta>;
  }

  select(body: SelectRequest): Promise<RegionBody> {
    return this.client.request("POST", "/select", body) as Promise<RegionBody>;
  }

  setFilter(body: FilterRequest): Promise<FilterBody> {
    return this.client.request("POST", "/filter", body) as Promise<FilterBody>;
  }

  choropleth(): Promise<ChoroplethBody> {
    return this.client.request("GET", "/choropleth") as Promise<ChoroplethBody>;
  }

  globalSeries(): Promise<GlobalSeriesBody> {
    return this.client.request("GET", "/aggregates/global") as Promise<GlobalSeriesBody>;
  }

  cumulativeSeries(): Promise<CumulativeBody> {
    return this.client.request("GET", "/aggregates/cumulative") as Promise<CumulativeBody>;
  }

  rankingSeries(): Promise<RankingBody> {
    return this.client.request("GET", "/aggregates/ranking") as Promise<RankingBody>;
  }

  radialSeries(): Promise<RadialBody> {
    return this.client.request("GET", "/aggregates/radial") as Promise<RadialBody>;
  }

  recompute(body: RecomputeRequest): Promise<HotspotSummary> {
    return this.client.request("POST", "/hotspots/recompute", body) as Promise<HotspotSummary>;
  }
}

/** Thin typed client over the service's /api endpoints. */

import type {
  AnalyticsDoc,
  GatewayVerdict,
  PriceCurveDoc,
  RunListDoc,
  RunTraceDoc,
} from "./types.js";

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

export type SubmitResult =
  | { kind: "accepted"; runId: string }
  | { kind: "rejected"; status: number; verdict: GatewayVerdict };

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchFn = (input, init) => fetch(input, init),
    private readonly base: string = "",
  ) {}

  /** 202 yields a run id; 400/429 yield the gateway verdict verbatim. */
  async submitRequest(text: string, stage?: string, clientId = "web-ui"): Promise<SubmitResult> {
    const response = await this.fetchFn(`${this.base}/api/requests`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ client_id: clientId, text, stage }),
    });
    if (response.status === 202) {
      const body = (await response.json()) as { run_id: string };
      return { kind: "accepted", runId: body.run_id };
    }
    if (response.status === 400 || response.status === 429) {
      const verdict = (await response.json()) as GatewayVerdict;
      return { kind: "rejected", status: response.status, verdict };
    }
    throw new ApiError(`unexpected status ${response.status}`, response.status);
  }

  async getRun(runId: string): Promise<RunTraceDoc> {
    return this.getJson<RunTraceDoc>(`/api/runs/${encodeURIComponent(runId)}`);
  }

  async listRuns(offset = 0, limit = 50): Promise<RunListDoc> {
    return this.getJson<RunListDoc>(`/api/runs?offset=${offset}&limit=${limit}`);
  }

  async getSchedules(runId: string) {
    return this.getJson<import("./types.js").ScheduleDoc[]>(
      `/api/schedules/${encodeURIComponent(runId)}`,
    );
  }

  async getPrices(marketDate: string): Promise<PriceCurveDoc> {
    return this.getJson<PriceCurveDoc>(`/api/prices/${marketDate}`);
  }

  async getAnalytics(): Promise<AnalyticsDoc> {
    return this.getJson<AnalyticsDoc>(`/api/analytics`);
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`);
    if (!response.ok) {
      throw new ApiError(`GET ${path} -> ${response.status}`, response.status);
    }
    return (await response.json()) as T;
  }
}

/** Typed client for the assessment service; all workbench traffic goes
 * through here so tests can swap in a recording fetch. */

import type {
  CausalResponse,
  DivergenceEntry,
  FootprintResponse,
  MatrixSummary,
  OptimizeResponse,
  ScenarioDoc,
  StoredScenario,
  ValidationDetail,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown>; text(): Promise<string> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: unknown,
  ) {
    super(`API error ${status}`);
  }

  get validationDetails(): ValidationDetail[] {
    const p = this.payload as { details?: ValidationDetail[] } | null;
    return p?.details ?? [];
  }
}

export class ConflictError extends ApiError {
  constructor(
    payload: unknown,
    readonly currentVersion: number | null,
  ) {
    super(409, payload);
  }
}

/** Non-optimal optimization outcome (infeasible / unbounded / timeout). */
export class OptimizeUnavailable extends Error {
  constructor(readonly statusBody: { status: string; kind?: string }) {
    super(statusBody.status);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) =>
      fetch(url, init) as ReturnType<FetchLike>,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 409) {
      const payload = (await response.json()) as { current_version?: number };
      throw new ConflictError(payload, payload.current_version ?? null);
    }
    if (response.status >= 400) {
      throw new ApiError(response.status, await response.json());
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; matrices_loaded: boolean }> {
    return this.request("GET", "/health");
  }

  matricesSummary(): Promise<MatrixSummary> {
    return this.request("GET", "/matrices/summary");
  }

  createScenario(id: string, scenario: ScenarioDoc): Promise<StoredScenario> {
    return this.request("POST", "/scenarios", { id, scenario });
  }

  getScenario(id: string): Promise<StoredScenario> {
    return this.request("GET", `/scenarios/${encodeURIComponent(id)}`);
  }

  listScenarios(): Promise<{ scenarios: StoredScenario[] }> {
    return this.request("GET", "/scenarios");
  }

  putScenario(
    id: string,
    scenario: ScenarioDoc,
    expectedVersion: number | null,
  ): Promise<StoredScenario> {
    return this.request("PUT", `/scenarios/${encodeURIComponent(id)}`, {
      scenario,
      expected_version: expectedVersion,
    });
  }

  assess(scenario: ScenarioDoc): Promise<FootprintResponse> {
    return this.request("POST", "/assess", { scenario });
  }

  causalQuery(
    doSet: string[],
    activityProbs: Record<string, number>,
    target: string,
  ): Promise<CausalResponse> {
    return this.request("POST", "/causal/query", {
      do: doSet,
      activity_probs: activityProbs,
      target,
    });
  }

  /** Throws OptimizeUnavailable on a structured 422 status body. */
  async optimize(body: Record<string, unknown>): Promise<OptimizeResponse> {
    try {
      return await this.request<OptimizeResponse>("POST", "/optimize", body);
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        throw new OptimizeUnavailable(err.payload as { status: string });
      }
      throw err;
    }
  }

  async compareScatterCsv(): Promise<string> {
    const response = await this.fetchFn(this.baseUrl + "/compare/scatter", {
      method: "GET",
    });
    if (response.status >= 400) {
      throw new ApiError(response.status, await response.text());
    }
    return response.text();
  }

  compareDivergence(): Promise<{ entries: DivergenceEntry[] }> {
    return this.request("GET", "/compare/divergence");
  }
}

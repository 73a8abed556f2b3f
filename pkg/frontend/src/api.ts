import type {
  HealthResponse,
  IndicatorResponse,
  LayoutResponse,
  MapResponse,
  OccupationsResponse,
  RecommendationsResponse,
  SkillGapResponse,
} from "./types.js";
import type { ExplorerState } from "./state.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = ((await resp.json()) as { detail?: string }).detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private base: string = "") {}

  private url(path: string, params: Record<string, string | number | null | undefined>): string {
    const search = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== null && value !== undefined && value !== "") search.set(key, String(value));
    }
    const query = search.toString();
    return `${this.base}${path}${query ? "?" + query : ""}`;
  }

  health(): Promise<HealthResponse> {
    return getJson(this.url("/api/health", {}));
  }

  occupations(year: number): Promise<OccupationsResponse> {
    return getJson(this.url("/api/occupations", { year }));
  }

  transitionMap(year: number): Promise<MapResponse> {
    return getJson(this.url("/api/map", { year }));
  }

  recommendations(state: ExplorerState, n = 10): Promise<RecommendationsResponse> {
    return getJson(this.url("/api/recommendations", {
      source: state.source,
      year: state.year,
      n,
      period_a: state.periodA,
      period_b: state.periodB,
    }));
  }

  skillGap(state: ExplorerState): Promise<SkillGapResponse> {
    return getJson(this.url("/api/skill-gap", {
      source: state.source,
      target: state.target,
      year: state.year,
    }));
  }

  indicator(industry: string | null): Promise<IndicatorResponse> {
    return getJson(this.url("/api/indicator", { industry }));
  }

  layout(year: number, kind: "skills" | "occupations"): Promise<LayoutResponse> {
    return getJson(this.url("/api/layout", { year, kind }));
  }
}

// Concurrent fetches resolve out of order; each view keeps a sequence number
// and drops responses that are no longer the latest request.
export class LatestOnly {
  private seq = 0;

  async run<T>(work: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    const result = await work();
    return ticket === this.seq ? result : null;
  }
}

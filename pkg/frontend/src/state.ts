// Explorer state lives in the URL query string so sessions are shareable;
// nothing is persisted client-side.

export type ViewName = "map" | "recommendations" | "skill-gap" | "indicator";

export interface ExplorerState {
  view: ViewName;
  year: number | null;
  source: string | null;
  target: string | null;
  periodA: string | null;       // e.g. "2019-03:2019-04"
  periodB: string | null;
  minPercentChange: number | null;
  requiredTag: string | null;
  minPostings: number | null;
  salaryFloor: number | null;
  industry: string | null;
}

export const DEFAULT_STATE: ExplorerState = {
  view: "map",
  year: null,
  source: null,
  target: null,
  periodA: null,
  periodB: null,
  minPercentChange: null,
  requiredTag: null,
  minPostings: null,
  salaryFloor: null,
  industry: null,
};

const VIEWS: ViewName[] = ["map", "recommendations", "skill-gap", "indicator"];

// query key per state field; omitted keys mean "default"
const KEYS: [keyof ExplorerState, string][] = [
  ["view", "view"],
  ["year", "year"],
  ["source", "source"],
  ["target", "target"],
  ["periodA", "pa"],
  ["periodB", "pb"],
  ["minPercentChange", "growth"],
  ["requiredTag", "tag"],
  ["minPostings", "postings"],
  ["salaryFloor", "salary"],
  ["industry", "industry"],
];

export function encodeState(state: ExplorerState): string {
  const params = new URLSearchParams();
  for (const [field, key] of KEYS) {
    const value = state[field];
    if (value === null || value === DEFAULT_STATE[field]) continue;
    params.set(key, String(value));
  }
  return params.toString();
}

export function decodeState(query: string): ExplorerState {
  const params = new URLSearchParams(query.startsWith("?") ? query.slice(1) : query);
  const state: ExplorerState = { ...DEFAULT_STATE };
  const view = params.get("view");
  if (view !== null && (VIEWS as string[]).includes(view)) state.view = view as ViewName;
  state.year = numOrNull(params.get("year"));
  state.source = params.get("source");
  state.target = params.get("target");
  state.periodA = params.get("pa");
  state.periodB = params.get("pb");
  state.minPercentChange = numOrNull(params.get("growth"));
  state.requiredTag = params.get("tag");
  state.minPostings = numOrNull(params.get("postings"));
  state.salaryFloor = numOrNull(params.get("salary"));
  state.industry = params.get("industry");
  return state;
}

function numOrNull(raw: string | null): number | null {
  if (raw === null || raw === "") return null;
  const value = Number(raw);
  return Number.isFinite(value) ? value : null;
}

// The skill-gap view is only reachable once both ends of the transition
// are chosen.
export function canShowSkillGap(state: ExplorerState): boolean {
  return state.source !== null && state.target !== null;
}

export function effectiveView(state: ExplorerState): ViewName {
  if (state.view === "skill-gap" && !canShowSkillGap(state)) {
    return "recommendations";
  }
  return state.view;
}

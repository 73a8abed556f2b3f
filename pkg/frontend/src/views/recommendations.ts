// Flow-style recommendation panel: rows ranked by the API's transition
// probability, bar width proportional to current posting volume, color keyed
// to demand percent change. Client-side filters only hide rows; they never
// reorder survivors or alter any number.

import type { OccupationRow, Recommendation, RecommendationsResponse } from "../types.js";
import type { ExplorerState } from "../state.js";

export interface RecommendationRowModel {
  target: string;
  title: string;
  probability: number;
  postingCurrent: number;
  postingReference: number;
  percentChange: number | null;
  percentLabel: string;
  widthFraction: number;      // share of the max current posting volume
  changeClass: "up" | "down" | "flat" | "unknown";
  tags: string[];
  medianSalary: number | null;
  visible: boolean;
  hiddenBy: string[];
}

export interface RecommendationPanelModel {
  source: string;
  sourceTitle: string;
  year: number;
  rows: RecommendationRowModel[];
}

export function changeClass(percent: number | null): RecommendationRowModel["changeClass"] {
  if (percent === null) return "unknown";
  if (percent > 0) return "up";
  if (percent < 0) return "down";
  return "flat";
}

export function percentLabel(percent: number | null): string {
  if (percent === null) return "n/a";
  const sign = percent > 0 ? "+" : "";
  return `${sign}${percent.toFixed(2)}%`;
}

function hiddenReasons(
  rec: Recommendation,
  state: ExplorerState,
  salary: number | null,
): string[] {
  const reasons = [...rec.filtered_by];
  if (state.minPercentChange !== null
      && (rec.percent_change === null || rec.percent_change < state.minPercentChange)) {
    reasons.push("min demand growth");
  }
  if (state.requiredTag !== null && !rec.tags.includes(state.requiredTag)) {
    reasons.push("tag");
  }
  if (state.minPostings !== null && rec.posting_frequency_current < state.minPostings) {
    reasons.push("min postings");
  }
  if (state.salaryFloor !== null && (salary === null || salary < state.salaryFloor)) {
    reasons.push("salary floor");
  }
  return [...new Set(reasons)];
}

export function buildRecommendationPanel(
  payload: RecommendationsResponse,
  state: ExplorerState,
  occupations: OccupationRow[] = [],
): RecommendationPanelModel {
  const salaries = new Map(occupations.map((o) => [o.code, o.median_salary]));
  const maxVolume = Math.max(1, ...payload.recommendations.map((r) => r.posting_frequency_current));
  const rows = payload.recommendations.map((rec) => {
    const salary = salaries.get(rec.target) ?? null;
    const hiddenBy = hiddenReasons(rec, state, salary);
    return {
      target: rec.target,
      title: rec.title,
      probability: rec.probability,
      postingCurrent: rec.posting_frequency_current,
      postingReference: rec.posting_frequency_reference,
      percentChange: rec.percent_change,
      percentLabel: percentLabel(rec.percent_change),
      widthFraction: rec.posting_frequency_current / maxVolume,
      changeClass: changeClass(rec.percent_change),
      tags: rec.tags,
      medianSalary: salary,
      visible: hiddenBy.length === 0,
      hiddenBy,
    };
  });
  return {
    source: payload.source,
    sourceTitle: payload.source_title,
    year: payload.year,
    rows,
  };
}

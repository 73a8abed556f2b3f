// Skill-gap scatter: importance percentile (x) against distance percentile
// (y). Develop a skill when both are high; skip it when either is low. The
// ranking order and every displayed value come straight from the API.

import type { SkillGapResponse, SkillGapRow } from "../types.js";

export type Quadrant =
  | "prioritize"
  | "already-held-or-easy"
  | "low-importance"
  | "low-both";

export const QUADRANT_LABELS: Record<Quadrant, string> = {
  "prioritize": "prioritize: important and hard to reach",
  "already-held-or-easy": "likely already held / easy to acquire",
  "low-importance": "low importance: not worth the effort",
  "low-both": "neither important nor distant",
};

export function quadrantOf(importancePct: number, distancePct: number): Quadrant {
  const highImportance = importancePct >= 0.5;
  const highDistance = distancePct >= 0.5;
  if (highImportance && highDistance) return "prioritize";
  if (highImportance) return "already-held-or-easy";
  if (highDistance) return "low-importance";
  return "low-both";
}

export interface SkillPointModel {
  skillId: number;
  name: string;
  x: number;                   // importance percentile
  y: number;                   // distance percentile
  score: number;
  quadrant: Quadrant;
  quadrantLabel: string;
  hover: string;               // raw importance / distance passthrough
}

export interface SkillGapModel {
  source: string;
  target: string;
  year: number;
  points: SkillPointModel[];   // in API order: acquisition score descending
}

export function buildSkillGapModel(payload: SkillGapResponse): SkillGapModel {
  const points = payload.skills.map((row: SkillGapRow) => {
    const quadrant = quadrantOf(row.importance_percentile, row.distance_percentile);
    return {
      skillId: row.skill_id,
      name: row.name,
      x: row.importance_percentile,
      y: row.distance_percentile,
      score: row.acquisition_score,
      quadrant,
      quadrantLabel: QUADRANT_LABELS[quadrant],
      hover: `w=${row.importance} 1-Θ=${row.distance}`,
    };
  });
  return {
    source: payload.source,
    target: payload.target,
    year: payload.year,
    points,
  };
}

// JSON payload shapes served by the read-only API. The explorer never
// recomputes scores: every number it shows comes from one of these fields.

export interface OccupationRow {
  code: string;
  title: string;
  posting_frequency: number;
  median_salary: number | null;
}

export interface OccupationsResponse {
  snapshot: string;
  year: number;
  occupations: OccupationRow[];
}

export interface Recommendation {
  target: string;
  title: string;
  probability: number;
  posting_frequency_reference: number;
  posting_frequency_current: number;
  percent_change: number | null;
  tags: string[];
  filtered_by: string[];
}

export interface RecommendationsResponse {
  snapshot: string;
  source: string;
  source_title: string;
  year: number;
  recommendations: Recommendation[];
}

export interface SkillGapRow {
  skill_id: number;
  name: string;
  importance: number;
  distance: number;
  importance_percentile: number;
  distance_percentile: number;
  acquisition_score: number;
}

export interface SkillGapResponse {
  snapshot: string;
  source: string;
  target: string;
  year: number;
  skills: SkillGapRow[];
}

export interface LayoutPoint {
  entity: string;
  name: string;
  x: string;
  y: string;
  cluster: string;
  automation_risk?: string | null;
}

export interface LayoutResponse {
  snapshot: string;
  year: number;
  kind: "skills" | "occupations";
  points: LayoutPoint[];
}

export interface IndicatorIndustry {
  code: string;
  title: string;
  values: (number | null)[];
  percent_change: number | null;
}

export interface IndicatorResponse {
  snapshot: string;
  years: number[];
  industries: IndicatorIndustry[];
}

export interface MapResponse {
  snapshot: string;
  year: number;
  occupations: string[];
  titles: string[];
  matrix: number[][];
}

export interface HealthResponse {
  status: string;
  snapshot: string | null;
  years?: number[];
}

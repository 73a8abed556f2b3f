// 2-D entity map: layout coordinates normalized into a viewBox, colored by
// cluster index, or by automation risk when the snapshot carries it.

import type { LayoutPoint, LayoutResponse } from "../types.js";

export interface MapPointModel {
  entity: string;
  name: string;
  cx: number;                 // normalized [0, 1]
  cy: number;
  color: string;
  riskColored: boolean;
}

export interface MapModel {
  kind: "skills" | "occupations";
  year: number;
  points: MapPointModel[];
}

const CLUSTER_PALETTE = [
  "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951", "#ff8ab7",
  "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0", "#bd2c55", "#2b6777", "#8fd694",
];

export function riskColor(risk: number): string {
  // 0 = safe (blue) .. 1 = high automation risk (red)
  const clamped = Math.max(0, Math.min(1, risk));
  const red = Math.round(40 + 200 * clamped);
  const blue = Math.round(220 - 180 * clamped);
  return `rgb(${red},60,${blue})`;
}

export function buildMapModel(payload: LayoutResponse): MapModel {
  const xs = payload.points.map((p) => Number(p.x));
  const ys = payload.points.map((p) => Number(p.y));
  const xMin = Math.min(...xs), xMax = Math.max(...xs);
  const yMin = Math.min(...ys), yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;

  const points = payload.points.map((p: LayoutPoint, i: number) => {
    const risk = p.automation_risk != null ? Number(p.automation_risk) : NaN;
    const riskColored = Number.isFinite(risk);
    const cluster = Number(p.cluster);
    return {
      entity: p.entity,
      name: p.name,
      cx: (xs[i] - xMin) / xSpan,
      cy: (ys[i] - yMin) / ySpan,
      color: riskColored
        ? riskColor(risk)
        : CLUSTER_PALETTE[(Number.isFinite(cluster) ? cluster : 0) % CLUSTER_PALETTE.length],
      riskColored,
    };
  });
  return { kind: payload.kind, year: payload.year, points };
}

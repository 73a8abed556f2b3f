// Technology-adoption indicator: one polyline per industry over the years
// the API provides, plus a per-year reading for the slider position.

import type { IndicatorResponse } from "../types.js";

export interface IndicatorSeriesModel {
  code: string;
  title: string;
  percentChange: number | null;
  // normalized polyline points in [0,1]^2, skipping missing years
  path: { x: number; y: number; year: number; value: number }[];
  valueAtSelected: number | null;
}

export interface IndicatorModel {
  years: number[];
  selectedYear: number;
  series: IndicatorSeriesModel[];
  maxValue: number;
}

export function buildIndicatorModel(
  payload: IndicatorResponse,
  selectedYear: number | null,
): IndicatorModel {
  const years = payload.years;
  const chosen = selectedYear !== null && years.includes(selectedYear)
    ? selectedYear
    : years[years.length - 1];
  const values = payload.industries.flatMap((s) => s.values.filter((v): v is number => v !== null));
  const maxValue = Math.max(1e-12, ...values);
  const span = Math.max(1, years.length - 1);

  const series = payload.industries.map((s) => {
    const path = s.values
      .map((value, i) => ({ value, year: years[i], i }))
      .filter((p): p is { value: number; year: number; i: number } => p.value !== null)
      .map((p) => ({ x: p.i / span, y: 1 - p.value / maxValue, year: p.year, value: p.value }));
    const idx = years.indexOf(chosen);
    return {
      code: s.code,
      title: s.title,
      percentChange: s.percent_change,
      path,
      valueAtSelected: idx >= 0 ? s.values[idx] : null,
    };
  });
  return { years, selectedYear: chosen, series, maxValue };
}

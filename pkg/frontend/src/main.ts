// Explorer shell: URL-encoded state, one fetch cycle per view, and DOM
// renders that copy API numbers verbatim.

import { ApiClient, ApiError, LatestOnly } from "./api.js";
import { clear, el, svgEl } from "./dom.js";
import {
  DEFAULT_STATE,
  ExplorerState,
  ViewName,
  canShowSkillGap,
  decodeState,
  effectiveView,
  encodeState,
} from "./state.js";
import { buildIndicatorModel } from "./views/indicator.js";
import { buildMapModel } from "./views/mapview.js";
import { buildRecommendationPanel } from "./views/recommendations.js";
import { buildSkillGapModel, QUADRANT_LABELS } from "./views/skillgap.js";
import type { OccupationRow } from "./types.js";

const api = new ApiClient("");
const inflight = { view: new LatestOnly(), indicator: new LatestOnly() };

let state: ExplorerState = { ...DEFAULT_STATE };
let occupationCache: { year: number; rows: OccupationRow[] } | null = null;

function setState(patch: Partial<ExplorerState>, push = true): void {
  state = { ...state, ...patch };
  if (push) {
    const query = encodeState(state);
    history.pushState(null, "", query ? `?${query}` : location.pathname);
  }
  void render();
}

function banner(message: string | null): void {
  const node = document.getElementById("error-banner")!;
  node.textContent = message ?? "";
  node.style.display = message ? "block" : "none";
}

async function occupationsFor(year: number): Promise<OccupationRow[]> {
  if (occupationCache === null || occupationCache.year !== year) {
    occupationCache = { year, rows: (await api.occupations(year)).occupations };
  }
  return occupationCache.rows;
}

// -- view renders -------------------------------------------------------------

async function renderRecommendations(container: HTMLElement): Promise<void> {
  if (state.source === null || state.year === null) {
    container.append(el("p", { class: "hint", text: "Pick a source occupation to rank transition targets." }));
    return;
  }
  const [payload, occupations] = await Promise.all([
    api.recommendations(state),
    occupationsFor(state.year),
  ]);
  const model = buildRecommendationPanel(payload, state, occupations);
  container.append(el("h2", { text: `Targets for ${model.sourceTitle} (${model.year})` }));
  const list = el("div", { class: "flow" });
  for (const row of model.rows) {
    if (!row.visible) {
      list.append(el("div", { class: "flow-row hidden-row" }, [
        el("span", { class: "flow-title", text: row.title }),
        el("span", { class: "flow-note", text: `hidden: ${row.hiddenBy.join(", ")}` }),
      ]));
      continue;
    }
    const bar = el("div", { class: `flow-bar ${row.changeClass}` });
    bar.style.width = `${Math.round(row.widthFraction * 100)}%`;
    const rowEl = el("div", { class: "flow-row" }, [
      el("span", { class: "flow-title", text: `${row.title} (${row.target})` }),
      el("span", { class: "flow-prob", text: row.probability.toFixed(4) }),
      bar,
      el("span", {
        class: "flow-note",
        text: `${row.postingReference} -> ${row.postingCurrent} ads, ${row.percentLabel}` +
          (row.tags.length ? ` [${row.tags.join(",")}]` : ""),
      }),
    ]);
    rowEl.addEventListener("click", () => {
      setState({ target: row.target, view: "skill-gap" });
    });
    list.append(rowEl);
  }
  container.append(list);
}

async function renderSkillGap(container: HTMLElement): Promise<void> {
  if (!canShowSkillGap(state) || state.year === null) {
    container.append(el("p", { class: "hint", text: "Select both a source and a target first." }));
    return;
  }
  const payload = await api.skillGap(state);
  const model = buildSkillGapModel(payload);
  container.append(el("h2", { text: `Skills to develop: ${model.source} -> ${model.target}` }));

  const size = 460;
  const svg = svgEl("svg", { viewBox: `0 0 ${size} ${size}`, class: "scatter" });
  svg.append(svgEl("line", { x1: String(size / 2), y1: "0", x2: String(size / 2), y2: String(size), class: "axis" }));
  svg.append(svgEl("line", { x1: "0", y1: String(size / 2), x2: String(size), y2: String(size / 2), class: "axis" }));
  const corners: [number, number, string][] = [
    [size * 0.75, 18, QUADRANT_LABELS["prioritize"]],
    [size * 0.75, size - 8, QUADRANT_LABELS["already-held-or-easy"]],
    [size * 0.25, 18, QUADRANT_LABELS["low-importance"]],
    [size * 0.25, size - 8, QUADRANT_LABELS["low-both"]],
  ];
  for (const [x, y, label] of corners) {
    const text = svgEl("text", { x: String(x), y: String(y), class: "quadrant-label" });
    text.textContent = label;
    svg.append(text);
  }
  for (const point of model.points) {
    const dot = svgEl("circle", {
      cx: String(point.x * (size - 20) + 10),
      cy: String((1 - point.y) * (size - 20) + 10),
      r: "5",
      class: `dot ${point.quadrant}`,
    });
    const tooltip = svgEl("title");
    tooltip.textContent = `${point.name}: ${point.hover}`;
    dot.append(tooltip);
    svg.append(dot);
  }
  container.append(svg);

  const table = el("table", { class: "ranking" });
  table.append(el("tr", {}, [
    el("th", { text: "#" }), el("th", { text: "skill" }), el("th", { text: "score" }),
    el("th", { text: "importance pct" }), el("th", { text: "distance pct" }),
    el("th", { text: "advice" }),
  ]));
  model.points.forEach((point, i) => {
    table.append(el("tr", {}, [
      el("td", { text: String(i + 1) }),
      el("td", { text: point.name }),
      el("td", { text: point.score.toFixed(4) }),
      el("td", { text: point.x.toFixed(3) }),
      el("td", { text: point.y.toFixed(3) }),
      el("td", { text: point.quadrantLabel }),
    ]));
  });
  container.append(table);
}

async function renderMap(container: HTMLElement): Promise<void> {
  if (state.year === null) {
    container.append(el("p", { class: "hint", text: "Pick a year to draw the map." }));
    return;
  }
  let payload;
  try {
    payload = await api.layout(state.year, "occupations");
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      payload = await api.layout(state.year, "skills");
    } else {
      throw err;
    }
  }
  const model = buildMapModel(payload);
  container.append(el("h2", { text: `${model.kind} map (${model.year})` }));
  const size = 520;
  const svg = svgEl("svg", { viewBox: `0 0 ${size} ${size}`, class: "scatter" });
  for (const point of model.points) {
    const dot = svgEl("circle", {
      cx: String(point.cx * (size - 24) + 12),
      cy: String(point.cy * (size - 24) + 12),
      r: "4",
    });
    dot.setAttribute("fill", point.color);
    const tooltip = svgEl("title");
    tooltip.textContent = point.name;
    dot.append(tooltip);
    if (model.kind === "occupations") {
      dot.addEventListener("click", () => {
        setState({ source: point.entity, view: "recommendations" });
      });
    }
    svg.append(dot);
  }
  container.append(svg);
  container.append(el("p", {
    class: "hint",
    text: model.points.some((p) => p.riskColored)
      ? "colored by automation risk (blue low, red high); click to choose a source"
      : "colored by skill cluster; click an occupation to choose it as source",
  }));
}

async function renderIndicator(container: HTMLElement): Promise<void> {
  const payload = await inflight.indicator.run(() => api.indicator(state.industry));
  if (payload === null) return;
  const model = buildIndicatorModel(payload, state.year);
  container.append(el("h2", { text: "Technology-adoption indicator" }));

  const width = 640, height = 320;
  const svg = svgEl("svg", { viewBox: `0 0 ${width} ${height}`, class: "chart" });
  for (const series of model.series) {
    if (series.path.length < 2) continue;
    const points = series.path
      .map((p) => `${10 + p.x * (width - 20)},${10 + p.y * (height - 40)}`)
      .join(" ");
    const line = svgEl("polyline", { points, class: "indicator-line" });
    const tooltip = svgEl("title");
    tooltip.textContent = `${series.title} (${series.percentChange === null ? "n/a" : series.percentChange.toFixed(1) + "% over span"})`;
    line.append(tooltip);
    svg.append(line);
  }
  container.append(svg);

  const slider = el("input", {
    type: "range",
    min: String(model.years[0]),
    max: String(model.years[model.years.length - 1]),
    value: String(model.selectedYear),
    step: "1",
  });
  // the slider drives only the indicator fetch cycle
  slider.addEventListener("change", () => {
    setState({ year: Number(slider.value) });
  });
  container.append(el("div", { class: "slider-row" }, [
    el("span", { text: `year: ${model.selectedYear}` }), slider,
  ]));

  const table = el("table", { class: "ranking" });
  table.append(el("tr", {}, [
    el("th", { text: "industry" }),
    el("th", { text: `value @ ${model.selectedYear}` }),
    el("th", { text: "change over span" }),
  ]));
  for (const series of model.series) {
    table.append(el("tr", {}, [
      el("td", { text: series.title }),
      el("td", { text: series.valueAtSelected === null ? "n/a" : series.valueAtSelected.toExponential(3) }),
      el("td", { text: series.percentChange === null ? "n/a" : `${series.percentChange.toFixed(1)}%` }),
    ]));
  }
  container.append(table);
}

// -- shell ---------------------------------------------------------------------

async function populateControls(): Promise<void> {
  const health = await api.health();
  const years = health.years ?? [];
  if (state.year === null && years.length) {
    state = { ...state, year: years[years.length - 1] };
  }
  const yearSelect = document.getElementById("year-select") as HTMLSelectElement;
  clear(yearSelect);
  for (const year of years) {
    yearSelect.append(el("option", { value: String(year), text: String(year) }));
  }
  yearSelect.value = String(state.year ?? "");
  yearSelect.addEventListener("change", () => setState({ year: Number(yearSelect.value) }));

  if (state.year !== null) {
    const rows = await occupationsFor(state.year);
    const sourceSelect = document.getElementById("source-select") as HTMLSelectElement;
    clear(sourceSelect);
    sourceSelect.append(el("option", { value: "", text: "(source occupation)" }));
    for (const row of rows) {
      sourceSelect.append(el("option", { value: row.code, text: `${row.title} (${row.code})` }));
    }
    sourceSelect.value = state.source ?? "";
    sourceSelect.addEventListener("change", () =>
      setState({ source: sourceSelect.value || null, target: null }));
  }

  for (const name of ["map", "recommendations", "skill-gap", "indicator"] as ViewName[]) {
    const button = document.getElementById(`nav-${name}`)!;
    button.addEventListener("click", () => setState({ view: name }));
  }

  const growth = document.getElementById("filter-growth") as HTMLInputElement;
  growth.value = state.minPercentChange === null ? "" : String(state.minPercentChange);
  growth.addEventListener("change", () =>
    setState({ minPercentChange: growth.value === "" ? null : Number(growth.value) }));
  const tag = document.getElementById("filter-tag") as HTMLInputElement;
  tag.value = state.requiredTag ?? "";
  tag.addEventListener("change", () => setState({ requiredTag: tag.value || null }));
  const postings = document.getElementById("filter-postings") as HTMLInputElement;
  postings.value = state.minPostings === null ? "" : String(state.minPostings);
  postings.addEventListener("change", () =>
    setState({ minPostings: postings.value === "" ? null : Number(postings.value) }));
  const salary = document.getElementById("filter-salary") as HTMLInputElement;
  salary.value = state.salaryFloor === null ? "" : String(state.salaryFloor);
  salary.addEventListener("change", () =>
    setState({ salaryFloor: salary.value === "" ? null : Number(salary.value) }));
}

async function render(): Promise<void> {
  const container = document.getElementById("view")!;
  const active = effectiveView(state);
  for (const name of ["map", "recommendations", "skill-gap", "indicator"]) {
    document.getElementById(`nav-${name}`)!.classList.toggle("active", name === active);
  }
  const result = await inflight.view.run(async () => {
    const scratch = el("div", {});
    try {
      if (active === "recommendations") await renderRecommendations(scratch);
      else if (active === "skill-gap") await renderSkillGap(scratch);
      else if (active === "indicator") await renderIndicator(scratch);
      else await renderMap(scratch);
      return { scratch, error: null as string | null };
    } catch (err) {
      const message = err instanceof ApiError
        ? `API error ${err.status}: ${err.message}`
        : `request failed: ${String(err)}`;
      return { scratch: null, error: message };
    }
  });
  if (result === null) return;          // superseded by a newer request
  if (result.error !== null) {
    banner(result.error);               // keep the previous view and state
    return;
  }
  banner(null);
  clear(container);
  container.append(...Array.from(result.scratch!.childNodes));
}

window.addEventListener("popstate", () => {
  state = decodeState(location.search);
  void render();
});

export async function start(): Promise<void> {
  state = decodeState(location.search);
  try {
    await populateControls();
  } catch (err) {
    banner(err instanceof ApiError ? `API error ${err.status}: ${err.message}` : String(err));
    return;
  }
  await render();
}

if (typeof document !== "undefined" && document.getElementById("view") !== null) {
  void start();
}

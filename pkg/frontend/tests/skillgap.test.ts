import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { buildSkillGapModel, quadrantOf } from "../src/views/skillgap.js";
import type { SkillGapResponse } from "../src/types.js";

const payload = JSON.parse(
  readFileSync(new URL("./fixtures/skill_gap.json", import.meta.url), "utf-8"),
) as SkillGapResponse;

describe("skill-gap view", () => {
  it("keeps the API's acquisition-score ordering", () => {
    const model = buildSkillGapModel(payload);
    const scores = model.points.map((p) => p.score);
    expect(scores).toEqual([...scores].sort((a, b) => b - a));
    expect(scores).toEqual(payload.skills.map((s) => s.acquisition_score));
  });

  it("quadrants follow the develop/skip rule", () => {
    // develop when importance AND distance are high; skip when either is low
    expect(quadrantOf(0.9, 0.9)).toBe("prioritize");
    expect(quadrantOf(0.9, 0.05)).toBe("already-held-or-easy");
    expect(quadrantOf(0.05, 0.9)).toBe("low-importance");
    expect(quadrantOf(0.1, 0.1)).toBe("low-both");
  });

  it("quadrant assignment is consistent with the score rule on the fixture", () => {
    const model = buildSkillGapModel(payload);
    for (const point of model.points) {
      expect(point.quadrant).toBe(quadrantOf(point.x, point.y));
      if (point.quadrant === "prioritize") {
        // both percentiles at least 0.5 implies score at least 0.25
        expect(point.score).toBeGreaterThanOrEqual(0.25);
      }
      if (point.x < 0.5 || point.y < 0.5) {
        expect(point.quadrant).not.toBe("prioritize");
      }
    }
  });

  it("hover text passes raw importance and distance through unchanged", () => {
    const model = buildSkillGapModel(payload);
    model.points.forEach((point, i) => {
      const row = payload.skills[i];
      expect(point.hover).toBe(`w=${row.importance} 1-Θ=${row.distance}`);
      expect(point.x).toBe(row.importance_percentile);
      expect(point.y).toBe(row.distance_percentile);
    });
  });

  it("every percentile is within [0, 1]", () => {
    const model = buildSkillGapModel(payload);
    for (const point of model.points) {
      expect(point.x).toBeGreaterThanOrEqual(0);
      expect(point.x).toBeLessThanOrEqual(1);
      expect(point.y).toBeGreaterThanOrEqual(0);
      expect(point.y).toBeLessThanOrEqual(1);
    }
  });
});

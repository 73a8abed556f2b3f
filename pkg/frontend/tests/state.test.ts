import { describe, expect, it } from "vitest";

import {
  DEFAULT_STATE,
  ExplorerState,
  canShowSkillGap,
  decodeState,
  effectiveView,
  encodeState,
} from "../src/state.js";

describe("url state codec", () => {
  it("round-trips a fully populated state", () => {
    const state: ExplorerState = {
      view: "skill-gap",
      year: 2018,
      source: "8112",
      target: "4231",
      periodA: "2019-03:2019-04",
      periodB: "2020-03:2020-04",
      minPercentChange: 0,
      requiredTag: "essential",
      minPostings: 50,
      salaryFloor: 45000,
      industry: "A",
    };
    expect(decodeState(encodeState(state))).toEqual(state);
  });

  it("round-trips the default state as an empty query", () => {
    expect(encodeState({ ...DEFAULT_STATE })).toBe("");
    expect(decodeState("")).toEqual(DEFAULT_STATE);
  });

  it("round-trips partial states and tolerates a leading question mark", () => {
    const partial = { ...DEFAULT_STATE, view: "recommendations" as const, source: "1000", year: 2018 };
    const query = encodeState(partial);
    expect(decodeState("?" + query)).toEqual(partial);
  });

  it("ignores unknown view names and junk numbers", () => {
    const state = decodeState("view=bogus&year=abc");
    expect(state.view).toBe(DEFAULT_STATE.view);
    expect(state.year).toBeNull();
  });

  it("encoding is stable under re-encoding", () => {
    const query = "view=indicator&year=2016&industry=B";
    expect(encodeState(decodeState(query))).toBe(query);
  });
});

describe("skill-gap preconditions", () => {
  it("requires both source and target", () => {
    const state = { ...DEFAULT_STATE, view: "skill-gap" as const, source: "1000" };
    expect(canShowSkillGap(state)).toBe(false);
    expect(effectiveView(state)).toBe("recommendations");
    expect(effectiveView({ ...state, target: "1001" })).toBe("skill-gap");
  });
});

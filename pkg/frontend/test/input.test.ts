import { describe, expect, it } from "vitest";

import { clickToAction, isTargetingToggle, keyToAction, throwTargets } from "../src/input";
import type { StateView } from "../src/types";

function view(partial: Partial<StateView> = {}): StateView {
  return {
    version: 1,
    map: "test",
    width: 5,
    height: 3,
    turn: 0,
    outcome: "ongoing",
    exit: [4, 1],
    hero: { pos: [1, 1], hp: 10, score: 0, javelin: "held" },
    javelinPos: null,
    grid: ["#####", "#...#", "#####"],
    items: [],
    monsters: [{ kind: "g", name: "goblin", pos: [3, 1], hp: 1, level: 0, stunned: 0 }],
    legalActions: [
      { type: "move", direction: "E" },
      { type: "move", direction: "W" },
      { type: "throw", target: [3, 1] },
    ],
    ...partial,
  };
}

describe("keyToAction", () => {
  it("maps ArrowRight to the east move", () => {
    expect(keyToAction("ArrowRight", view(), false)).toEqual({
      type: "move",
      direction: "E",
    });
  });

  it("maps wasd too", () => {
    expect(keyToAction("a", view(), false)).toEqual({ type: "move", direction: "W" });
  });

  it("refuses moves the server did not list", () => {
    expect(keyToAction("ArrowUp", view(), false)).toBeNull();
  });

  it("ignores unrelated keys", () => {
    expect(keyToAction("x", view(), false)).toBeNull();
  });

  it("produces nothing while targeting", () => {
    expect(keyToAction("ArrowRight", view(), true)).toBeNull();
  });
});

describe("clickToAction", () => {
  it("throws at a clicked legal monster tile in targeting mode", () => {
    expect(clickToAction([3, 1], view(), true)).toEqual({
      type: "throw",
      target: [3, 1],
    });
  });

  it("ignores clicks on non-target tiles", () => {
    expect(clickToAction([2, 1], view(), true)).toBeNull();
  });

  it("ignores clicks outside targeting mode", () => {
    expect(clickToAction([3, 1], view(), false)).toBeNull();
  });

  it("cannot throw once the javelin is on the ground", () => {
    const grounded = view({
      legalActions: [{ type: "move", direction: "E" }],
      hero: { pos: [1, 1], hp: 10, score: 0, javelin: "ground" },
    });
    expect(clickToAction([3, 1], grounded, true)).toBeNull();
  });
});

describe("helpers", () => {
  it("lists throwable targets", () => {
    expect(throwTargets(view())).toEqual([[3, 1]]);
  });

  it("recognizes the targeting toggle", () => {
    expect(isTargetingToggle("t")).toBe(true);
    expect(isTargetingToggle("T")).toBe(true);
    expect(isTargetingToggle("u")).toBe(false);
  });
});

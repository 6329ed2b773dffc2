// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { composeGrid, renderGrid, renderOutcome, renderPrediction, renderStatus } from "../src/render";
import type { Prediction, StateView } from "../src/types";

function view(partial: Partial<StateView> = {}): StateView {
  return {
    version: 1,
    map: "test",
    width: 5,
    height: 3,
    turn: 4,
    outcome: "ongoing",
    exit: [4, 1],
    hero: { pos: [1, 1], hp: 7, score: 2, javelin: "held" },
    javelinPos: null,
    grid: ["#####", "#...S", "#####"].map((r) => r.padEnd(5, "#")),
    items: [{ kind: "treasure", pos: [2, 1] }],
    monsters: [{ kind: "g", name: "goblin", pos: [3, 1], hp: 1, level: 0, stunned: 0 }],
    legalActions: [{ type: "move", direction: "E" }],
    ...partial,
  };
}

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.appendChild(root);
});

describe("composeGrid", () => {
  it("layers hero, items and monsters over the base grid", () => {
    const rows = composeGrid(view());
    expect(rows[1][1]).toBe("@");
    expect(rows[1][2]).toBe("$");
    expect(rows[1][3]).toBe("g");
  });

  it("shows the grounded javelin", () => {
    const rows = composeGrid(
      view({ javelinPos: [2, 1], items: [], monsters: [] }),
    );
    expect(rows[1][2]).toBe("/");
  });
});

describe("renderGrid", () => {
  it("renders every tile and marks targets", () => {
    renderGrid(root, view(), [[3, 1]], () => {});
    expect(root.querySelectorAll(".grid-row")).toHaveLength(3);
    expect(root.querySelectorAll(".cell")).toHaveLength(15);
    const target = root.querySelector(".cell-target") as HTMLElement;
    expect(target.dataset.x).toBe("3");
    expect(target.textContent).toBe("g");
  });

  it("forwards tile clicks", () => {
    let clicked: [number, number] | null = null;
    renderGrid(root, view(), [], (tile) => (clicked = tile));
    const hero = root.querySelector(".cell-hero") as HTMLElement;
    hero.click();
    expect(clicked).toEqual([1, 1]);
  });
});

describe("renderStatus", () => {
  it("shows hp in the 0..10 range and the score", () => {
    renderStatus(root, view(), false);
    expect(root.querySelector(".hp")?.textContent).toContain("7/10");
    expect(root.querySelector(".score")?.textContent).toContain("2");
  });

  it("announces targeting mode", () => {
    renderStatus(root, view(), true);
    expect(root.querySelector(".mode")?.textContent).toContain("TARGETING");
  });
});

describe("renderPrediction", () => {
  const prediction: Prediction = {
    probabilities: { runner: 0.9, treasureCollector: 0.4, monsterKiller: 0.15 },
    basedOnTurns: 4,
    modelId: "model-svm.json",
  };

  it("draws three independent bars", () => {
    renderPrediction(root, prediction);
    const fills = root.querySelectorAll<HTMLElement>(".bar-fill");
    expect(fills).toHaveLength(3);
    expect(fills[0].style.width).toBe("90%");
    expect(fills[1].style.width).toBe("40%");
    expect(fills[2].style.width).toBe("15%");
    // independent probabilities: no constraint that the bars sum to 100%
    const total = [...fills].reduce((s, f) => s + parseFloat(f.dataset.value!), 0);
    expect(total).toBeGreaterThan(1.0);
  });

  it("renders placeholders without a model", () => {
    renderPrediction(root, null);
    expect(root.querySelectorAll(".bar-fill")).toHaveLength(3);
    expect(root.textContent).toContain("–");
  });
});

describe("renderOutcome", () => {
  it("stays hidden while the game runs", () => {
    renderOutcome(root, view());
    expect(root.hidden).toBe(true);
  });

  it("shows the death overlay", () => {
    renderOutcome(root, view({ outcome: "dead" }));
    expect(root.hidden).toBe(false);
    expect(root.className).toContain("overlay-dead");
    expect(root.textContent).toContain("died");
  });

  it("shows the victory overlay with the turn count", () => {
    renderOutcome(root, view({ outcome: "won", turn: 12 }));
    expect(root.textContent).toContain("12 turns");
  });
});

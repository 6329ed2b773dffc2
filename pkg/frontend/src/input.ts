// Keyboard and click mapping. Only actions the server listed as legal are
// ever produced; everything else maps to null (no request).

import type { ActionRequest, Direction, StateView } from "./types";

const KEY_DIRECTIONS: Record<string, Direction> = {
  ArrowUp: "N",
  ArrowDown: "S",
  ArrowRight: "E",
  ArrowLeft: "W",
  w: "N",
  s: "S",
  d: "E",
  a: "W",
};

export const TARGETING_KEY = "t";

export function isTargetingToggle(key: string): boolean {
  return key.toLowerCase() === TARGETING_KEY;
}

function legalMove(view: StateView, direction: Direction): ActionRequest | null {
  for (const action of view.legalActions) {
    if (action.type === "move" && action.direction === direction) {
      return action;
    }
  }
  return null;
}

export function keyToAction(
  key: string,
  view: StateView,
  targeting: boolean,
): ActionRequest | null {
  if (targeting) {
    return null; // targeting mode only accepts clicks (or Escape/t to leave)
  }
  const direction = KEY_DIRECTIONS[key];
  return direction ? legalMove(view, direction) : null;
}

export function clickToAction(
  tile: [number, number],
  view: StateView,
  targeting: boolean,
): ActionRequest | null {
  if (!targeting) {
    return null;
  }
  for (const action of view.legalActions) {
    if (
      action.type === "throw" &&
      action.target[0] === tile[0] &&
      action.target[1] === tile[1]
    ) {
      return action;
    }
  }
  return null; // not a visible monster tile (or javelin not held)
}

export function throwTargets(view: StateView): [number, number][] {
  const targets: [number, number][] = [];
  for (const action of view.legalActions) {
    if (action.type === "throw") {
      targets.push(action.target);
    }
  }
  return targets;
}

// DOM rendering: dungeon grid, status line, event log, prediction bars.
// Everything is rebuilt from the latest server payload; the client keeps no
// game state of its own.

import type { GameEvent, Prediction, StateView } from "./types";

const MONSTER_GLYPHS: Record<string, string> = {
  g: "g",
  w: "w",
  b: "b",
  o: "o",
  m: "M",
};

export function composeGrid(view: StateView): string[][] {
  const rows = view.grid.map((row) => row.split(""));
  for (const item of view.items) {
    rows[item.pos[1]][item.pos[0]] = item.kind === "treasure" ? "$" : "+";
  }
  if (view.javelinPos) {
    rows[view.javelinPos[1]][view.javelinPos[0]] = "/";
  }
  for (const monster of view.monsters) {
    rows[monster.pos[1]][monster.pos[0]] = MONSTER_GLYPHS[monster.kind] ?? "?";
  }
  const [hx, hy] = view.hero.pos;
  rows[hy][hx] = "@";
  return rows;
}

export function renderGrid(
  container: HTMLElement,
  view: StateView,
  targets: [number, number][],
  onTileClick: (tile: [number, number]) => void,
): void {
  container.textContent = "";
  const targetSet = new Set(targets.map(([x, y]) => `${x},${y}`));
  const rows = composeGrid(view);
  rows.forEach((row, y) => {
    const rowEl = document.createElement("div");
    rowEl.className = "grid-row";
    row.forEach((glyph, x) => {
      const cell = document.createElement("span");
      cell.className = `cell cell-${classify(glyph)}`;
      if (targetSet.has(`${x},${y}`)) {
        cell.classList.add("cell-target");
      }
      cell.textContent = glyph;
      cell.dataset.x = String(x);
      cell.dataset.y = String(y);
      cell.addEventListener("click", () => onTileClick([x, y]));
      rowEl.appendChild(cell);
    });
    container.appendChild(rowEl);
  });
}

function classify(glyph: string): string {
  if (glyph === "#") return "wall";
  if (glyph === "@") return "hero";
  if (glyph === "S") return "exit";
  if (glyph === "$") return "treasure";
  if (glyph === "+") return "potion";
  if (glyph === "^") return "trap";
  if (glyph === "/") return "javelin";
  if (glyph >= "0" && glyph <= "9") return "portal";
  if (glyph === ".") return "floor";
  return "monster";
}

export function renderStatus(container: HTMLElement, view: StateView, targeting: boolean): void {
  const hearts = "♥".repeat(view.hero.hp) + "·".repeat(10 - view.hero.hp);
  container.innerHTML = `
    <span class="hp" data-hp="${view.hero.hp}">hp ${view.hero.hp}/10 <span class="hearts">${hearts}</span></span>
    <span class="score">treasure ${view.hero.score}</span>
    <span class="turn">turn ${view.turn}</span>
    <span class="javelin">javelin: ${view.hero.javelin}</span>
    <span class="mode">${targeting ? "TARGETING — click a highlighted monster" : "moving (t = throw)"}</span>
  `;
}

export function renderEvents(container: HTMLElement, events: GameEvent[]): void {
  for (const event of events) {
    if (event.kind === "end_turn") continue;
    const line = document.createElement("div");
    line.className = `event event-${event.kind}`;
    line.textContent = `turn ${event.turn}: ${event.kind.replace(/_/g, " ")} at (${event.subject[0]}, ${event.subject[1]})`;
    container.prepend(line);
  }
  while (container.childElementCount > 30) {
    container.lastElementChild?.remove();
  }
}

export function renderPrediction(container: HTMLElement, prediction: Prediction | null): void {
  const bars: [string, string, number][] = prediction
    ? [
        ["runner", "R", prediction.probabilities.runner],
        ["treasureCollector", "TC", prediction.probabilities.treasureCollector],
        ["monsterKiller", "MK", prediction.probabilities.monsterKiller],
      ]
    : [
        ["runner", "R", 0],
        ["treasureCollector", "TC", 0],
        ["monsterKiller", "MK", 0],
      ];
  container.textContent = "";
  for (const [name, label, value] of bars) {
    const row = document.createElement("div");
    row.className = "bar-row";
    const tag = document.createElement("span");
    tag.className = "bar-label";
    tag.textContent = label;
    const track = document.createElement("div");
    track.className = "bar-track";
    const fill = document.createElement("div");
    fill.className = `bar-fill bar-${name}`;
    fill.style.width = `${Math.round(value * 100)}%`;
    fill.dataset.value = value.toFixed(3);
    track.appendChild(fill);
    const pct = document.createElement("span");
    pct.className = "bar-pct";
    pct.textContent = prediction ? `${Math.round(value * 100)}%` : "–";
    row.append(tag, track, pct);
    container.appendChild(row);
  }
}

export function renderOutcome(container: HTMLElement, view: StateView): void {
  if (view.outcome === "ongoing") {
    container.hidden = true;
    container.textContent = "";
    return;
  }
  container.hidden = false;
  container.className = `overlay overlay-${view.outcome}`;
  container.textContent =
    view.outcome === "won"
      ? `You reached the stairs in ${view.turn} turns!`
      : "You died. The dungeon claims another hero.";
}

export function renderBanner(container: HTMLElement, message: string | null): void {
  if (!message) {
    container.hidden = true;
    container.textContent = "";
    return;
  }
  container.hidden = false;
  container.textContent = message;
}

// Session flow: intake questionnaire first, then level after level through
// the server API. All rules live server-side; a dropped or rejected request
// just re-syncs from GET /sessions/{id}.

import { ApiError, SessionApi } from "./api";
import { clickToAction, isTargetingToggle, keyToAction, throwTargets } from "./input";
import {
  renderBanner,
  renderEvents,
  renderGrid,
  renderOutcome,
  renderPrediction,
  renderStatus,
} from "./render";
import { buildQuestionnaire } from "./questionnaire";
import type { StateView } from "./types";

export interface AppElements {
  grid: HTMLElement;
  status: HTMLElement;
  events: HTMLElement;
  prediction: HTMLElement;
  overlay: HTMLElement;
  banner: HTMLElement;
  mapPicker: HTMLElement;
  questionnaire: HTMLElement;
}

export class App {
  private sessionId: string | null = null;
  private view: StateView | null = null;
  private targeting = false;
  private busy = false;
  private questionnaireDone = false;

  constructor(
    private readonly api: SessionApi,
    private readonly el: AppElements,
  ) {}

  async start(): Promise<void> {
    const { maps } = await this.api.listMaps();
    const tutorial = maps.find((m) => m.tutorial) ?? maps[0];
    await this.openSession(tutorial.name);
    this.showQuestionnaire();
    this.buildMapPicker(maps.map((m) => m.name));
    window.addEventListener("keydown", (event) => this.onKey(event));
  }

  private showQuestionnaire(): void {
    this.el.questionnaire.hidden = false;
    buildQuestionnaire(this.el.questionnaire, async (answers) => {
      if (!this.sessionId) return;
      try {
        const result = await this.api.submitQuestionnaire(this.sessionId, answers);
        this.el.questionnaire.hidden = true;
        this.el.questionnaire.textContent = "";
        this.questionnaireDone = true;
        renderBanner(
          this.el.banner,
          `Answers saved (self-view R/TC/MK: ${result.scores.runner.toFixed(1)}/` +
            `${result.scores.treasureCollector.toFixed(1)}/${result.scores.monsterKiller.toFixed(1)}). Arrow keys to move.`,
        );
      } catch (error) {
        renderBanner(this.el.banner, describe(error));
      }
    });
  }

  private buildMapPicker(names: string[]): void {
    this.el.mapPicker.textContent = "";
    for (const name of names) {
      const button = document.createElement("button");
      button.textContent = name;
      button.addEventListener("click", () => void this.openSession(name));
      this.el.mapPicker.appendChild(button);
    }
  }

  async openSession(map: string): Promise<void> {
    const payload = await this.api.createSession(map);
    this.sessionId = payload.id;
    this.targeting = false;
    this.view = payload.state;
    renderEvents(this.el.events, []);
    this.el.events.textContent = "";
    this.redraw(null);
  }

  private async onKey(event: KeyboardEvent): Promise<void> {
    if (!this.view || !this.sessionId || this.busy || !this.questionnaireDone) {
      return;
    }
    if (this.view.outcome !== "ongoing") {
      return;
    }
    if (isTargetingToggle(event.key) && this.view.hero.javelin === "held") {
      this.targeting = !this.targeting;
      this.redraw(undefined);
      return;
    }
    if (event.key === "Escape") {
      this.targeting = false;
      this.redraw(undefined);
      return;
    }
    const action = keyToAction(event.key, this.view, this.targeting);
    if (action) {
      event.preventDefault();
      await this.submit(action);
    }
  }

  private async onTileClick(tile: [number, number]): Promise<void> {
    if (!this.view || !this.sessionId || this.busy) return;
    const action = clickToAction(tile, this.view, this.targeting);
    if (action) {
      this.targeting = false;
      await this.submit(action);
    }
  }

  private async submit(action: Parameters<SessionApi["submitAction"]>[1]): Promise<void> {
    if (!this.sessionId) return;
    this.busy = true;
    try {
      const response = await this.api.submitAction(this.sessionId, action);
      this.view = response.state;
      renderEvents(this.el.events, response.events);
      this.redraw(response.prediction);
      renderBanner(this.el.banner, null);
      if (this.view.outcome !== "ongoing") {
        const finish = await this.api.finishSession(this.sessionId);
        renderBanner(
          this.el.banner,
          `Trace ${finish.trace.digest} saved (${finish.outcome}, ${finish.trace.turns} turns). Pick a map to play again.`,
        );
      }
    } catch (error) {
      // server said no (or the response never arrived): re-sync and carry on
      renderBanner(this.el.banner, describe(error));
      try {
        const payload = await this.api.getSession(this.sessionId);
        this.view = payload.state;
        this.redraw(undefined);
      } catch {
        renderBanner(this.el.banner, "Lost the session; pick a map to start anew.");
      }
    } finally {
      this.busy = false;
    }
  }

  private redraw(prediction: Parameters<typeof renderPrediction>[1] | undefined): void {
    if (!this.view) return;
    renderGrid(
      this.el.grid,
      this.view,
      this.targeting ? throwTargets(this.view) : [],
      (tile) => void this.onTileClick(tile),
    );
    renderStatus(this.el.status, this.view, this.targeting);
    renderOutcome(this.el.overlay, this.view);
    if (prediction !== undefined) {
      renderPrediction(this.el.prediction, prediction);
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`;
  }
  return String(error);
}

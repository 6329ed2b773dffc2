import { SessionApi } from "./api";
import { App, type AppElements } from "./app";

function grab(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

const elements: AppElements = {
  grid: grab("grid"),
  status: grab("status"),
  events: grab("events"),
  prediction: grab("prediction"),
  overlay: grab("overlay"),
  banner: grab("banner"),
  mapPicker: grab("map-picker"),
  questionnaire: grab("questionnaire"),
};

const app = new App(new SessionApi(""), elements);
app.start().catch((error) => {
  grab("banner").hidden = false;
  grab("banner").textContent = `Could not reach the session service: ${error}`;
});

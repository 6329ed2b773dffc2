// Payload shapes for the session-service API (payload version 1).

export type Direction = "N" | "S" | "E" | "W";

export type ActionRequest =
  | { type: "move"; direction: Direction }
  | { type: "throw"; target: [number, number] };

export interface HeroView {
  pos: [number, number];
  hp: number;
  score: number;
  javelin: "held" | "ground";
}

export interface MonsterView {
  kind: string; // glyph: g, w, b, o, m
  name: string;
  pos: [number, number];
  hp: number;
  level: number;
  stunned: number;
}

export interface ItemView {
  kind: "treasure" | "potion";
  pos: [number, number];
}

export interface StateView {
  version: number;
  map: string;
  width: number;
  height: number;
  turn: number;
  outcome: "ongoing" | "won" | "dead";
  exit: [number, number];
  hero: HeroView;
  javelinPos: [number, number] | null;
  grid: string[];
  items: ItemView[];
  monsters: MonsterView[];
  legalActions: ActionRequest[];
}

export interface SessionPayload {
  id: string;
  status: "active" | "finished";
  state: StateView;
}

export interface GameEvent {
  kind: string;
  turn: number;
  subject: [number, number];
}

export interface Prediction {
  probabilities: {
    runner: number;
    treasureCollector: number;
    monsterKiller: number;
  };
  basedOnTurns: number;
  modelId: string | null;
}

export interface ActionResponse {
  state: StateView;
  events: GameEvent[];
  prediction: Prediction | null;
}

export interface FinishResponse {
  outcome: "won" | "dead" | "abandoned";
  trace: {
    file: string;
    digest: string;
    map: string;
    source: string;
    outcome: string;
    turns: number;
  };
}

export interface QuestionnaireAnswers {
  playFrequency: number;
  answers: number[]; // nine values, 0..4
}

export interface QuestionnaireResult {
  stored: boolean;
  scores: { runner: number; treasureCollector: number; monsterKiller: number };
}

export interface MapInfo {
  name: string;
  width: number;
  height: number;
  monsters: number;
  treasures: number;
  tutorial: boolean;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

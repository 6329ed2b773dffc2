// Thin fetch client for the session service. The server is the only rules
// authority; this module never interprets game state beyond passing it on.

import type {
  ActionRequest,
  ActionResponse,
  FinishResponse,
  MapInfo,
  Prediction,
  QuestionnaireAnswers,
  QuestionnaireResult,
  SessionPayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const code = body?.error?.code ?? "UNKNOWN";
    const message = body?.error?.message ?? response.statusText;
    throw new ApiError(response.status, code, message);
  }
  return body as T;
}

export class SessionApi {
  constructor(private readonly baseUrl: string = "") {}

  listMaps(): Promise<{ maps: MapInfo[] }> {
    return request(`${this.baseUrl}/api/maps`);
  }

  createSession(map: string): Promise<SessionPayload> {
    return request(`${this.baseUrl}/api/sessions`, {
      method: "POST",
      body: JSON.stringify({ map }),
    });
  }

  getSession(id: string): Promise<SessionPayload> {
    return request(`${this.baseUrl}/api/sessions/${id}`);
  }

  submitAction(id: string, action: ActionRequest): Promise<ActionResponse> {
    return request(`${this.baseUrl}/api/sessions/${id}/actions`, {
      method: "POST",
      body: JSON.stringify(action),
    });
  }

  getPrediction(id: string): Promise<Prediction> {
    return request(`${this.baseUrl}/api/sessions/${id}/prediction`);
  }

  finishSession(id: string): Promise<FinishResponse> {
    return request(`${this.baseUrl}/api/sessions/${id}/finish`, { method: "POST" });
  }

  submitQuestionnaire(
    id: string,
    answers: QuestionnaireAnswers,
  ): Promise<QuestionnaireResult> {
    return request(`${this.baseUrl}/api/sessions/${id}/questionnaire`, {
      method: "POST",
      body: JSON.stringify(answers),
    });
  }
}

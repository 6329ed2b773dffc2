"""Live-play session service.

Serves game state to a browser client, applies submitted actions through
the rules engine (the server is the only rules authority), persists each
finished session as a playtrace in the standard trace format, computes
questionnaire scores, and reports live persona predictions from a loaded
frequency model.

Routes (JSON bodies, versioned payloads):

    GET  /api/maps
    POST /api/sessions                     {"map": name}
    GET  /api/sessions/{id}
    POST /api/sessions/{id}/actions        {"type": "move", "direction": "N"}
                                           {"type": "throw", "target": [x, y]}
    GET  /api/sessions/{id}/prediction
    POST /api/sessions/{id}/finish
    POST /api/sessions/{id}/questionnaire  {"playFrequency": 0-4, "answers": [9 x 0-4]}
    GET  /api/sessions/{id}/questionnaire

Errors carry machine-readable codes: {"error": {"code": ..., "message": ...}}.
"""
from __future__ import annotations

import datetime as dt
import json
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .engine.events import MECHANIC_COUNT, MechanicEvent
from .engine.level import GLYPH_BY_MONSTER, Level
from .engine.rules import legal_actions, step
from .engine.state import GameState, Move, Outcome, ThrowJavelin, initial_state
from .errors import IllegalActionError
from .labeling import questionnaire_scores, QuestionnaireResponse
from .learn import load_svm
from .maps import REFERENCE_MAPS, TUTORIAL_MAPS, load_builtin
from .trace import (
    OUTCOME_FROM_ENGINE,
    Playtrace,
    TraceOutcome,
    TraceSource,
    TurnRecord,
    trace_to_lines,
)

PAYLOAD_VERSION = 1


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class Session:
    id: str
    level: Level
    state: GameState
    map_name: str
    created_at: str
    records: list[TurnRecord] = field(default_factory=list)
    status: str = "active"
    counts: np.ndarray = field(default_factory=lambda: np.zeros(MECHANIC_COUNT))
    questionnaire: dict | None = None
    trace_ref: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory sessions plus append-only trace persistence."""

    def __init__(self, data_dir: Path):
        self.data_dir = data_dir
        self.sessions: dict[str, Session] = {}
        self.store_lock = threading.Lock()
        self.write_lock = threading.Lock()
        data_dir.mkdir(parents=True, exist_ok=True)

    def create(self, level: Level, map_name: str) -> Session:
        session = Session(
            id=secrets.token_urlsafe(12),
            level=level,
            state=initial_state(level),
            map_name=map_name,
            created_at=dt.datetime.now(dt.timezone.utc).isoformat(),
        )
        with self.store_lock:
            self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ApiError(404, "UNKNOWN_SESSION", f"no session {session_id!r}")
        return session

    def persist_trace(self, trace: Playtrace) -> dict:
        day = dt.date.today().strftime("%Y%m%d")
        trace_file = self.data_dir / f"traces-{day}.jsonl"
        index_file = self.data_dir / "index.json"
        ref = {
            "file": trace_file.name,
            "digest": trace.digest(),
            "map": trace.map_name,
            "source": str(trace.source),
            "outcome": trace.outcome.value,
            "turns": len(trace.turns),
        }
        with self.write_lock:
            with open(trace_file, "a", encoding="utf-8") as fh:
                for line in trace_to_lines(trace):
                    fh.write(line + "\n")
            index = []
            if index_file.exists():
                index = json.loads(index_file.read_text(encoding="utf-8"))
            index.append(ref)
            index_file.write_text(json.dumps(index, indent=2), encoding="utf-8")
        return ref

    def persist_questionnaire(self, session_id: str, record: dict) -> None:
        with self.write_lock:
            with open(self.data_dir / "questionnaires.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"session": session_id, **record}) + "\n")


# -- payload rendering -----------------------------------------------------------


def _xy(level: Level, idx: int) -> list[int]:
    x, y = level.to_xy(idx)
    return [x, y]


def base_grid(level: Level) -> list[str]:
    """Static terrain rows: walls, floor, stairs, traps, portal digits."""
    portal_digit: dict[int, str] = {}
    seen = set()
    digit = 0
    for pos in sorted(level.portals):
        if pos in seen:
            continue
        twin = level.portals[pos]
        portal_digit[pos] = portal_digit[twin] = str(digit)
        seen.update((pos, twin))
        digit += 1
    rows = []
    for y in range(level.height):
        row = []
        for x in range(level.width):
            idx = level.to_idx(x, y)
            if level.walls[idx]:
                row.append("#")
            elif idx == level.exit:
                row.append("S")
            elif idx in level.traps:
                row.append("^")
            elif idx in portal_digit:
                row.append(portal_digit[idx])
            else:
                row.append(".")
        rows.append("".join(row))
    return rows


def action_to_json(level: Level, action) -> dict:
    if isinstance(action, Move):
        return {"type": "move", "direction": action.direction}
    return {"type": "throw", "target": _xy(level, action.target)}


def event_to_json(level: Level, event: MechanicEvent) -> dict:
    return {
        "kind": event.kind.name.lower(),
        "turn": event.turn,
        "subject": _xy(level, event.subject),
    }


def state_view(session: Session) -> dict:
    state = session.state
    level = session.level
    view = {
        "version": PAYLOAD_VERSION,
        "map": session.map_name,
        "width": level.width,
        "height": level.height,
        "turn": state.turn,
        "outcome": state.outcome.name.lower(),
        "exit": _xy(level, level.exit),
        "hero": {
            "pos": _xy(level, state.hero_pos),
            "hp": state.hero_hp,
            "score": state.treasure_score,
            "javelin": "held" if state.javelin_ground is None else "ground",
        },
        "javelinPos": None if state.javelin_ground is None else _xy(level, state.javelin_ground),
        "grid": base_grid(level),
        "items": sorted(
            [{"kind": "treasure", "pos": _xy(level, t)} for t in state.treasures]
            + [{"kind": "potion", "pos": _xy(level, p)} for p in state.potions],
            key=lambda item: (item["pos"][1], item["pos"][0]),
        ),
        "monsters": [
            {
                "kind": GLYPH_BY_MONSTER[m.kind],
                "name": m.kind.name.lower(),
                "pos": _xy(level, m.pos),
                "hp": m.hp,
                "level": m.level,
                "stunned": m.stun,
            }
            for m in state.monsters
            if m.alive
        ],
        "legalActions": (
            [action_to_json(level, a) for a in legal_actions(state)]
            if state.outcome == Outcome.ONGOING
            else []
        ),
    }
    return view


# -- request models ----------------------------------------------------------------


class CreateSessionRequest(BaseModel):
    map: str


class ActionRequest(BaseModel):
    type: str
    direction: str | None = None
    target: list[int] | None = None


class QuestionnaireRequest(BaseModel):
    playFrequency: int
    answers: list[int]


def create_app(
    model_path: str | None = None,
    data_dir: str = "session-data",
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="dungeon-personas session service")
    store = SessionStore(Path(data_dir))
    model = load_svm(model_path) if model_path else None
    model_id = Path(model_path).name if model_path else None
    maps = {name: load_builtin(name) for name in REFERENCE_MAPS + TUTORIAL_MAPS}

    @app.exception_handler(ApiError)
    async def handle_api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    def prediction_snapshot(session: Session) -> dict:
        if model is None:
            raise ApiError(409, "MODEL_NOT_LOADED", "service started without a model")
        from .trace import FeatureVector

        vector = model.normalizer.apply(FeatureVector(session.counts.copy()))
        probs = model.probabilities(vector)
        return {
            "probabilities": {
                "runner": probs[0],
                "treasureCollector": probs[1],
                "monsterKiller": probs[2],
            },
            "basedOnTurns": len(session.records),
            "modelId": model_id,
        }

    @app.get("/api/maps")
    def list_maps():
        return {
            "version": PAYLOAD_VERSION,
            "maps": [
                {
                    "name": name,
                    "width": level.width,
                    "height": level.height,
                    "monsters": len(level.monsters),
                    "treasures": len(level.treasures),
                    "tutorial": name in TUTORIAL_MAPS,
                }
                for name, level in maps.items()
            ],
        }

    @app.post("/api/sessions")
    def create_session(req: CreateSessionRequest):
        level = maps.get(req.map)
        if level is None:
            raise ApiError(404, "UNKNOWN_MAP", f"no map named {req.map!r}")
        session = store.create(level, req.map)
        return {"id": session.id, "status": session.status, "state": state_view(session)}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        return {"id": session.id, "status": session.status, "state": state_view(session)}

    @app.post("/api/sessions/{session_id}/actions")
    def submit_action(session_id: str, req: ActionRequest):
        session = store.get(session_id)
        with session.lock:
            if session.status != "active" or session.state.outcome != Outcome.ONGOING:
                raise ApiError(409, "SESSION_FINISHED", "the game is over")
            level = session.level
            if req.type == "move":
                if req.direction not in ("N", "S", "E", "W"):
                    raise ApiError(400, "BAD_ACTION", "direction must be N, S, E or W")
                action = Move(req.direction)
            elif req.type == "throw":
                if not req.target or len(req.target) != 2:
                    raise ApiError(400, "BAD_ACTION", "throw needs a [x, y] target")
                x, y = req.target
                if not level.in_bounds(x, y):
                    raise ApiError(400, "BAD_ACTION", "target out of bounds")
                action = ThrowJavelin(level.to_idx(x, y))
            else:
                raise ApiError(400, "BAD_ACTION", f"unknown action type {req.type!r}")
            try:
                next_state, events = step(session.state, action)
            except IllegalActionError as exc:
                raise ApiError(400, "ILLEGAL_ACTION", str(exc)) from exc
            session.state = next_state
            session.records.append(
                TurnRecord(
                    turn=next_state.turn,
                    action=action,
                    hero_pos=next_state.hero_pos,
                    hero_hp=next_state.hero_hp,
                    score=next_state.treasure_score,
                    events=tuple(events),
                    state_hash=next_state.digest(),
                )
            )
            for event in events:
                session.counts[event.kind] += 1
            return {
                "state": state_view(session),
                "events": [event_to_json(level, e) for e in events],
                "prediction": prediction_snapshot(session) if model else None,
            }

    @app.get("/api/sessions/{session_id}/prediction")
    def get_prediction(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return prediction_snapshot(session)

    @app.post("/api/sessions/{session_id}/finish")
    def finish_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if session.status != "active":
                raise ApiError(409, "SESSION_FINISHED", "session already finished")
            outcome = OUTCOME_FROM_ENGINE.get(session.state.outcome, TraceOutcome.ABANDONED)
            trace = Playtrace(
                map_name=session.map_name,
                source=TraceSource("human", session.id),
                initial_state=initial_state(session.level),
                turns=tuple(session.records),
                outcome=outcome,
            )
            session.trace_ref = store.persist_trace(trace)
            session.status = "finished"
            return {"outcome": outcome.value, "trace": session.trace_ref}

    @app.post("/api/sessions/{session_id}/questionnaire")
    def submit_questionnaire(session_id: str, req: QuestionnaireRequest):
        session = store.get(session_id)
        try:
            response = QuestionnaireResponse(req.playFrequency, tuple(req.answers))
        except ValueError as exc:
            raise ApiError(400, "BAD_QUESTIONNAIRE", str(exc)) from exc
        r, tc, mk = questionnaire_scores(response)
        record = {
            "playFrequency": response.play_frequency,
            "answers": list(response.answers),
            "scores": {"runner": r, "treasureCollector": tc, "monsterKiller": mk},
        }
        with session.lock:
            session.questionnaire = record
        store.persist_questionnaire(session_id, record)
        return {"stored": True, "scores": record["scores"]}

    @app.get("/api/sessions/{session_id}/questionnaire")
    def get_questionnaire(session_id: str):
        session = store.get(session_id)
        if session.questionnaire is None:
            raise ApiError(404, "NO_QUESTIONNAIRE", "none submitted for this session")
        return session.questionnaire

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="client")

    return app

"""Playtrace recording, serialization, and learning representations.

A trace is the unit of labeling and learning: the initial state plus one
record per turn (action, hero snapshot after the action, mechanic events,
and a digest of the post-action state). Replaying the recorded actions from
the initial state must reproduce every digest; everything downstream leans
on that closure property.

Two inputs are derived from a trace: the 17-slot mechanic frequency vector
and the per-turn 3x3 observation window sequence cropped around the hero.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, NamedTuple

import numpy as np

from .engine.events import MECHANIC_COUNT, Mechanic, MechanicEvent
from .engine.level import GLYPH_BY_MONSTER, Level, MonsterKind, load_map
from .engine.rules import step
from .engine.state import (
    Action,
    GameState,
    Monster,
    Move,
    Outcome,
    ThrowJavelin,
    initial_state,
)
from .errors import (
    AlreadyNormalizedError,
    ReplayMismatchError,
    TraceFormatError,
)

TRACE_FORMAT_VERSION = 1


class TraceOutcome(str, Enum):
    WON = "won"
    DEAD = "dead"
    ABANDONED = "abandoned"


OUTCOME_FROM_ENGINE = {Outcome.WON: TraceOutcome.WON, Outcome.DEAD: TraceOutcome.DEAD}


@dataclass(frozen=True)
class TraceSource:
    kind: str  # "synthetic" or "human"
    detail: str  # persona name or session id

    def __str__(self) -> str:
        return f"{self.kind}:{self.detail}"

    @classmethod
    def parse(cls, text: str) -> "TraceSource":
        kind, _, detail = text.partition(":")
        return cls(kind, detail)


class TurnRecord(NamedTuple):
    turn: int
    action: Action
    hero_pos: int
    hero_hp: int
    score: int
    events: tuple[MechanicEvent, ...]
    state_hash: str


@dataclass(eq=False)
class Playtrace:
    map_name: str
    source: TraceSource
    initial_state: GameState
    turns: tuple[TurnRecord, ...]
    outcome: TraceOutcome

    @property
    def level(self) -> Level:
        return self.initial_state.level

    def digest(self) -> str:
        """Identity over level, starting state, and the action sequence."""
        payload = (
            self.level.digest,
            self.initial_state.key(),
            tuple(r.action for r in self.turns),
        )
        return hashlib.blake2b(repr(payload).encode(), digest_size=8).hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Playtrace):
            return NotImplemented
        return (
            self.map_name == other.map_name
            and self.source == other.source
            and self.outcome == other.outcome
            and self.turns == other.turns
            and self.initial_state.same_state(other.initial_state)
        )


# -- recording ---------------------------------------------------------------


def record_episode(
    level: Level,
    action_source: Callable[[GameState], Action],
    max_turns: int = 500,
    source: TraceSource = TraceSource("synthetic", "scripted"),
    map_name: str | None = None,
) -> Playtrace:
    """Run a full episode, recording one TurnRecord per applied action.

    The provider must return a legal action for every ongoing state; an
    illegal one raises IllegalActionError. Episodes still unresolved after
    ``max_turns`` actions come back with the ABANDONED outcome.
    """
    start = initial_state(level)
    state = start
    records: list[TurnRecord] = []
    while state.outcome == Outcome.ONGOING and state.turn < max_turns:
        action = action_source(state)
        state, events = step(state, action)
        records.append(
            TurnRecord(
                turn=state.turn,
                action=action,
                hero_pos=state.hero_pos,
                hero_hp=state.hero_hp,
                score=state.treasure_score,
                events=tuple(events),
                state_hash=state.digest(),
            )
        )
    outcome = OUTCOME_FROM_ENGINE.get(state.outcome, TraceOutcome.ABANDONED)
    return Playtrace(
        map_name=map_name or level.name,
        source=source,
        initial_state=start,
        turns=tuple(records),
        outcome=outcome,
    )


def replay(trace: Playtrace) -> Iterator[tuple[GameState, TurnRecord, GameState]]:
    """Yield (pre_state, record, post_state), verifying digests as it goes."""
    state = trace.initial_state
    for record in trace.turns:
        nxt, _ = step(state, record.action)
        if nxt.digest() != record.state_hash:
            raise ReplayMismatchError(
                f"turn {record.turn}: digest {nxt.digest()} != recorded {record.state_hash}"
            )
        yield state, record, nxt
        state = nxt


def verify_replay(trace: Playtrace) -> None:
    for _ in replay(trace):
        pass


# -- mechanic frequencies ------------------------------------------------------


@dataclass
class FeatureVector:
    """Per-trace mechanic counts in the fixed enumeration order."""

    counts: np.ndarray  # shape (17,), float64
    normalized: bool = False

    def copy(self) -> "FeatureVector":
        return FeatureVector(self.counts.copy(), self.normalized)


def mechanic_frequencies(trace: Playtrace) -> FeatureVector:
    counts = np.zeros(MECHANIC_COUNT)
    for record in trace.turns:
        for event in record.events:
            counts[event.kind] += 1
    return FeatureVector(counts, normalized=False)


@dataclass
class Normalizer:
    """Per-mechanic max scaling fitted on a training split."""

    per_mechanic_max: np.ndarray  # shape (17,), strictly positive

    def apply(self, vector: FeatureVector) -> FeatureVector:
        if vector.normalized:
            raise AlreadyNormalizedError("vector is already normalized")
        return FeatureVector(vector.counts / self.per_mechanic_max, normalized=True)

    def apply_all(self, vectors: Iterable[FeatureVector]) -> list[FeatureVector]:
        return [self.apply(v) for v in vectors]


def fit_normalizer(dataset: list[FeatureVector]) -> Normalizer:
    if not dataset:
        raise ValueError("cannot fit a normalizer on an empty dataset")
    if any(v.normalized for v in dataset):
        raise AlreadyNormalizedError("fit expects raw count vectors")
    stacked = np.stack([v.counts for v in dataset])
    # Mechanics that never fire normalize to zero; clamp avoids 0/0.
    return Normalizer(np.maximum(stacked.max(axis=0), 1.0))


# -- cropped state sequences ---------------------------------------------------

CROP_CHANNELS = (
    "wall",
    "floor",
    "exit",
    "treasure",
    "potion",
    "trap",
    "portal",
    "goblin",
    "wizard",
    "blob",
    "ogre",
    "minitaur",
    "javelin_on_ground",
)
CROP_SIZE = 3
CROP_FEATURES = CROP_SIZE * CROP_SIZE * len(CROP_CHANNELS) + 1  # + hp scalar

_MONSTER_CHANNEL = {
    MonsterKind.GOBLIN: CROP_CHANNELS.index("goblin"),
    MonsterKind.GOBLIN_WIZARD: CROP_CHANNELS.index("wizard"),
    MonsterKind.BLOB: CROP_CHANNELS.index("blob"),
    MonsterKind.OGRE: CROP_CHANNELS.index("ogre"),
    MonsterKind.MINITAUR: CROP_CHANNELS.index("minitaur"),
}


@dataclass
class CroppedSequence:
    """Per-turn 3x3 observation windows plus the hero hp scalar."""

    windows: np.ndarray  # (turns, 3, 3, channels)
    hero_hp: np.ndarray  # (turns,), scaled to [0, 1]

    def __len__(self) -> int:
        return self.windows.shape[0]

    def features(self) -> np.ndarray:
        """Flattened (turns, 118) model input."""
        flat = self.windows.reshape(len(self), -1)
        return np.concatenate([flat, self.hero_hp[:, None]], axis=1)


def crop_window(state: GameState, center: int | None = None) -> np.ndarray:
    """One 3x3xC window around a tile (default: the hero's tile).

    Out-of-bounds cells read as walls; blob cells carry level / 3 as their
    intensity; every cell has exactly one terrain channel set.
    """
    level = state.level
    cx, cy = level.to_xy(state.hero_pos if center is None else center)
    window = np.zeros((CROP_SIZE, CROP_SIZE, len(CROP_CHANNELS)))
    for wy in range(CROP_SIZE):
        for wx in range(CROP_SIZE):
            x, y = cx + wx - 1, cy + wy - 1
            if not level.in_bounds(x, y):
                window[wy, wx, 0] = 1.0  # wall
                continue
            idx = level.to_idx(x, y)
            if level.walls[idx]:
                window[wy, wx, 0] = 1.0
                continue
            window[wy, wx, 2 if idx == level.exit else 1] = 1.0  # exit / floor
            if idx in state.treasures:
                window[wy, wx, 3] = 1.0
            if idx in state.potions:
                window[wy, wx, 4] = 1.0
            if idx in level.traps:
                window[wy, wx, 5] = 1.0
            if idx in level.portals:
                window[wy, wx, 6] = 1.0
            monster = state.monster_at(idx)
            if monster is not None:
                value = monster.level / 3 if monster.kind == MonsterKind.BLOB else 1.0
                window[wy, wx, _MONSTER_CHANNEL[monster.kind]] = value
            if state.javelin_ground == idx:
                window[wy, wx, 12] = 1.0
    return window


def crop_sequence(trace: Playtrace) -> CroppedSequence:
    """One window per turn, taken from the state the action was chosen in."""
    windows = []
    hps = []
    for pre_state, _, _ in replay(trace):
        windows.append(crop_window(pre_state))
        hps.append(pre_state.hero_hp / 10)
    if windows:
        return CroppedSequence(np.stack(windows), np.array(hps))
    shape = (0, CROP_SIZE, CROP_SIZE, len(CROP_CHANNELS))
    return CroppedSequence(np.zeros(shape), np.zeros(0))


# -- serialization ---------------------------------------------------------------


def _xy(level: Level, idx: int) -> list[int]:
    return list(level.to_xy(idx))


def _action_to_json(level: Level, action: Action) -> dict:
    if isinstance(action, Move):
        return {"type": "move", "direction": action.direction}
    return {"type": "throw", "target": _xy(level, action.target)}


def _action_from_json(level: Level, data: dict) -> Action:
    if data["type"] == "move":
        return Move(data["direction"])
    x, y = data["target"]
    return ThrowJavelin(level.to_idx(x, y))


def _event_to_json(level: Level, event: MechanicEvent) -> dict:
    return {
        "kind": event.kind.name.lower(),
        "turn": event.turn,
        "subject": _xy(level, event.subject),
    }


def _event_from_json(level: Level, data: dict) -> MechanicEvent:
    x, y = data["subject"]
    return MechanicEvent(
        Mechanic[data["kind"].upper()], data["turn"], level.to_idx(x, y)
    )


def state_to_json(state: GameState) -> dict:
    level = state.level
    return {
        "heroPos": _xy(level, state.hero_pos),
        "heroHp": state.hero_hp,
        "score": state.treasure_score,
        "javelin": "held" if state.javelin_ground is None else _xy(level, state.javelin_ground),
        "turn": state.turn,
        "outcome": state.outcome.name.lower(),
        "ogreTreasures": state.ogre_treasures,
        "treasures": sorted(_xy(level, t) for t in state.treasures),
        "potions": sorted(_xy(level, p) for p in state.potions),
        "monsters": [
            {
                "kind": GLYPH_BY_MONSTER[m.kind],
                "pos": _xy(level, m.pos),
                "hp": m.hp,
                "level": m.level,
                "stun": m.stun,
                "alive": m.alive,
            }
            for m in state.monsters
        ],
    }


_MONSTER_BY_GLYPH = {glyph: kind for kind, glyph in GLYPH_BY_MONSTER.items()}


def state_from_json(level: Level, data: dict) -> GameState:
    javelin = data["javelin"]
    return GameState(
        level=level,
        hero_pos=level.to_idx(*data["heroPos"]),
        hero_hp=data["heroHp"],
        treasure_score=data["score"],
        javelin_ground=None if javelin == "held" else level.to_idx(*javelin),
        monsters=tuple(
            Monster(
                kind=_MONSTER_BY_GLYPH[m["kind"]],
                pos=level.to_idx(*m["pos"]),
                hp=m["hp"],
                level=m["level"],
                stun=m["stun"],
                alive=m["alive"],
            )
            for m in data["monsters"]
        ),
        treasures=frozenset(level.to_idx(x, y) for x, y in data["treasures"]),
        potions=frozenset(level.to_idx(x, y) for x, y in data["potions"]),
        ogre_treasures=data["ogreTreasures"],
        turn=data["turn"],
        outcome=Outcome[data["outcome"].upper()],
    )


def trace_to_lines(trace: Playtrace) -> list[str]:
    level = trace.level
    header = {
        "record": "header",
        "version": TRACE_FORMAT_VERSION,
        "map": trace.map_name,
        "mapText": level.text,
        "source": str(trace.source),
        "outcome": trace.outcome.value,
        "initial": state_to_json(trace.initial_state),
    }
    lines = [json.dumps(header, separators=(",", ":"))]
    for record in trace.turns:
        lines.append(
            json.dumps(
                {
                    "record": "turn",
                    "turn": record.turn,
                    "action": _action_to_json(level, record.action),
                    "heroPos": _xy(level, record.hero_pos),
                    "heroHp": record.hero_hp,
                    "score": record.score,
                    "events": [_event_to_json(level, e) for e in record.events],
                    "stateHash": record.state_hash,
                },
                separators=(",", ":"),
            )
        )
    return lines


def write_traces(traces: Iterable[Playtrace], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            for line in trace_to_lines(trace):
                fh.write(line + "\n")


class _TraceAssembler:
    def __init__(self):
        self.header: dict | None = None
        self.level: Level | None = None
        self.records: list[TurnRecord] = []

    def start(self, header: dict) -> None:
        self.header = header
        self.level = load_map(header["mapText"], name=header["map"])
        self.records = []

    def add_turn(self, data: dict) -> None:
        level = self.level
        self.records.append(
            TurnRecord(
                turn=data["turn"],
                action=_action_from_json(level, data["action"]),
                hero_pos=level.to_idx(*data["heroPos"]),
                hero_hp=data["heroHp"],
                score=data["score"],
                events=tuple(_event_from_json(level, e) for e in data["events"]),
                state_hash=data["stateHash"],
            )
        )

    def finish(self) -> Playtrace:
        header = self.header
        return Playtrace(
            map_name=header["map"],
            source=TraceSource.parse(header["source"]),
            initial_state=state_from_json(self.level, header["initial"]),
            turns=tuple(self.records),
            outcome=TraceOutcome(header["outcome"]),
        )


def read_traces(path) -> list[Playtrace]:
    traces: list[Playtrace] = []
    assembler = _TraceAssembler()
    open_trace = False
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                kind = data["record"]
                if kind == "header":
                    if open_trace:
                        traces.append(assembler.finish())
                    assembler.start(data)
                    open_trace = True
                elif kind == "turn":
                    if not open_trace:
                        raise TraceFormatError(line_number, "turn record before header")
                    assembler.add_turn(data)
                else:
                    raise TraceFormatError(line_number, f"unknown record kind {kind!r}")
            except TraceFormatError:
                raise
            except Exception as exc:
                raise TraceFormatError(line_number, str(exc)) from exc
    if open_trace:
        traces.append(assembler.finish())
    return traces


# -- feature CSV export ----------------------------------------------------------

FEATURE_CSV_COLUMNS = [m.name.lower() for m in Mechanic] + [
    "label_runner",
    "label_treasure_collector",
    "label_monster_killer",
]


def write_feature_csv(vectors, label_sets, path) -> None:
    """17 mechanic columns in enumeration order plus the three label flags."""
    if len(vectors) != len(label_sets):
        raise ValueError("vectors and labels differ in length")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(FEATURE_CSV_COLUMNS) + "\n")
        for vector, labels in zip(vectors, label_sets):
            values = [
                format(v, ".10g") if vector.normalized else str(int(v))
                for v in vector.counts
            ]
            values += [
                str(int(labels.runner)),
                str(int(labels.treasure_collector)),
                str(int(labels.monster_killer)),
            ]
            fh.write(",".join(values) + "\n")

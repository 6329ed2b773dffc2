"""Deterministic turn-based dungeon rules engine."""

from .events import MECHANIC_COUNT, MECHANIC_NAMES, Mechanic, MechanicEvent
from .level import Level, MonsterKind, load_map
from .rules import apply_action, is_terminal, legal_actions, line_of_sight
from .state import (
    HERO_MAX_HP,
    Action,
    GameState,
    Monster,
    Move,
    Outcome,
    ThrowJavelin,
    initial_state,
    spawn_monster,
)

__all__ = [
    "Action",
    "GameState",
    "HERO_MAX_HP",
    "Level",
    "MECHANIC_COUNT",
    "MECHANIC_NAMES",
    "Mechanic",
    "MechanicEvent",
    "Monster",
    "MonsterKind",
    "Move",
    "Outcome",
    "ThrowJavelin",
    "apply_action",
    "initial_state",
    "is_terminal",
    "legal_actions",
    "line_of_sight",
    "load_map",
    "spawn_monster",
]

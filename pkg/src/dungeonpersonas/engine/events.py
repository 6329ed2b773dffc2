"""The tracked gameplay mechanics and their event record.

The enumeration order is load-bearing: feature vectors index into it, so it
must never be reordered.
"""
from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple


class Mechanic(IntEnum):
    ENEMY_KILL = 0
    GOBLIN_HIT = 1
    MINITAUR_HIT = 2
    GOBLIN_WIZARD_HIT = 3
    BLOB_HIT = 4
    OGRE_HIT = 5
    OGRE_TREASURE = 6
    BLOB_POTION = 7
    BLOB_COMBINE = 8
    JAVELIN_THROW = 9
    COLLECT_TREASURE = 10
    CONSUME_POTION = 11
    TRIGGER_TRAP = 12
    USE_PORTAL = 13
    END_TURN = 14
    DIE = 15
    REACH_STAIRS = 16


MECHANIC_COUNT = len(Mechanic)

MECHANIC_NAMES = [m.name.lower() for m in Mechanic]


class MechanicEvent(NamedTuple):
    """One mechanic firing: what, on which turn, at which tile (flat index)."""

    kind: Mechanic
    turn: int
    subject: int

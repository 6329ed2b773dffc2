"""Game state snapshot, actions, and canonical state digests.

States are treated as immutable: rule application always returns a fresh
GameState and never touches its input. The javelin is either held
(javelin_ground is None) or lying on a tile; a throw resolves within the
same turn it is made.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple, Union

from .level import Level, MonsterKind

HERO_MAX_HP = 10

MONSTER_BASE_HP = {
    MonsterKind.GOBLIN: 1,
    MonsterKind.GOBLIN_WIZARD: 1,
    MonsterKind.BLOB: 1,
    MonsterKind.OGRE: 2,
    MonsterKind.MINITAUR: 0,  # immortal sentinel; never removed for hp reasons
}

MINITAUR_STUN_TURNS = 5
BLOB_MAX_LEVEL = 3


class Outcome(IntEnum):
    ONGOING = 0
    WON = 1
    DEAD = 2


class Monster(NamedTuple):
    """One monster. ``level`` is meaningful for blobs, ``stun`` for minitaurs."""

    kind: MonsterKind
    pos: int
    hp: int
    level: int
    stun: int
    alive: bool


def spawn_monster(kind: MonsterKind, pos: int) -> Monster:
    level = 1 if kind == MonsterKind.BLOB else 0
    return Monster(kind, pos, MONSTER_BASE_HP[kind], level, 0, True)


class Move(NamedTuple):
    direction: str  # one of N, S, E, W


class ThrowJavelin(NamedTuple):
    target: int  # flat tile index of the targeted monster


Action = Union[Move, ThrowJavelin]


@dataclass(slots=True, eq=False)
class GameState:
    """Full world snapshot; never mutated after construction."""

    level: Level
    hero_pos: int
    hero_hp: int
    treasure_score: int
    javelin_ground: int | None  # None while the hero holds the javelin
    monsters: tuple[Monster, ...]
    treasures: frozenset[int]
    potions: frozenset[int]
    ogre_treasures: int  # treasures consumed by ogres, for conservation checks
    turn: int
    outcome: Outcome
    _key: tuple | None = field(default=None, repr=False)
    # Derived-value caches; safe because states are immutable by contract.
    _legal: list | None = field(default=None, repr=False)
    _heuristics: list | None = field(default=None, repr=False)
    _sid: int | None = field(default=None, repr=False)  # interning id, see rules.step

    def key(self) -> tuple:
        """Canonical hashable identity of everything but the level itself."""
        k = self._key
        if k is None:
            k = (
                self.hero_pos,
                self.hero_hp,
                self.treasure_score,
                -1 if self.javelin_ground is None else self.javelin_ground,
                self.turn,
                int(self.outcome),
                self.ogre_treasures,
                tuple(sorted(self.treasures)),
                tuple(sorted(self.potions)),
                tuple(self.monsters),
            )
            self._key = k
        return k

    def digest(self) -> str:
        """Stable 64-bit hex digest of the canonical serialization."""
        return hashlib.blake2b(repr(self.key()).encode(), digest_size=8).hexdigest()

    def same_state(self, other: "GameState") -> bool:
        return self.key() == other.key() and self.level.digest == other.level.digest

    def monster_at(self, pos: int) -> Monster | None:
        for monster in self.monsters:
            if monster.alive and monster.pos == pos:
                return monster
        return None

    def alive_monsters(self) -> list[Monster]:
        return [m for m in self.monsters if m.alive]


def initial_state(level: Level) -> GameState:
    return GameState(
        level=level,
        hero_pos=level.hero_start,
        hero_hp=HERO_MAX_HP,
        treasure_score=0,
        javelin_ground=None,
        monsters=tuple(spawn_monster(kind, pos) for kind, pos in level.monsters),
        treasures=level.treasures,
        potions=level.potions,
        ogre_treasures=0,
        turn=0,
        outcome=Outcome.ONGOING,
    )

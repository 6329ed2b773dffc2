"""Level representation and the ASCII map loader.

Map format, one glyph per tile, rectangular UTF-8 text:

    '#' wall          '.' floor         '@' hero start    'S' exit stairs
    '$' treasure      '+' potion        '^' trap          '0'-'9' portal pair
    'g' goblin        'w' goblin wizard 'b' blob (lvl 1)  'o' ogre
    'm' minitaur

Every non-'#' glyph implies a floor tile underneath.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum

from ..errors import (
    MapFormatError,
    MissingExitError,
    MissingHeroError,
    NonRectangularError,
    UnknownGlyphError,
    UnpairedPortalError,
)
from .geometry import DIR_DELTAS, DIRECTIONS, bfs_distances, supercover_cells


class MonsterKind(IntEnum):
    GOBLIN = 0
    GOBLIN_WIZARD = 1
    BLOB = 2
    OGRE = 3
    MINITAUR = 4


MONSTER_GLYPHS = {
    "g": MonsterKind.GOBLIN,
    "w": MonsterKind.GOBLIN_WIZARD,
    "b": MonsterKind.BLOB,
    "o": MonsterKind.OGRE,
    "m": MonsterKind.MINITAUR,
}

GLYPH_BY_MONSTER = {kind: glyph for glyph, kind in MONSTER_GLYPHS.items()}


@dataclass
class Level:
    """Static level geometry plus cached distance/sight lookups.

    Positions are flat indices (y * width + x). The caches are derived from
    walls only, so they stay valid for every game state on this level.
    """

    name: str
    width: int
    height: int
    walls: bytes
    hero_start: int
    exit: int
    treasures: frozenset[int]
    potions: frozenset[int]
    traps: frozenset[int]
    portals: dict[int, int]
    monsters: tuple[tuple[MonsterKind, int], ...]
    text: str

    _neighbors: list[list[int]] = field(default_factory=list, repr=False)
    _move_targets: list[dict[str, int]] = field(default_factory=list, repr=False)
    _open_moves: list[list[tuple[str, int]]] = field(default_factory=list, repr=False)
    _step_candidates: list[list[int]] = field(default_factory=list, repr=False)
    _dist_rows: dict[int, list[int]] = field(default_factory=dict, repr=False)
    _los_cache: dict[int, bool] = field(default_factory=dict, repr=False)
    _digest: str = field(default="", repr=False)

    def __post_init__(self):
        n = self.width * self.height
        neighbors: list[list[int]] = []
        move_targets: list[dict[str, int]] = []
        open_moves: list[list[tuple[str, int]]] = []
        step_candidates: list[list[int]] = []
        for idx in range(n):
            x, y = idx % self.width, idx // self.width
            targets: dict[str, int] = {}
            open_here: list[tuple[str, int]] = []
            open_neighbors: list[int] = []
            for direction in DIRECTIONS:
                dx, dy = DIR_DELTAS[direction]
                nx, ny = x + dx, y + dy
                if 0 <= nx < self.width and 0 <= ny < self.height:
                    nidx = ny * self.width + nx
                    targets[direction] = nidx
                    if not self.walls[nidx]:
                        open_neighbors.append(nidx)
                        open_here.append((direction, nidx))
            neighbors.append(open_neighbors)
            move_targets.append(targets)
            open_moves.append(open_here)
            # Non-wall neighbors in ascending flat order = row-major scan.
            step_candidates.append(sorted(open_neighbors))
        self._neighbors = neighbors
        self._move_targets = move_targets
        self._open_moves = open_moves
        self._step_candidates = step_candidates
        self._digest = hashlib.blake2b(
            self.text.encode("utf-8"), digest_size=8
        ).hexdigest()

    # -- coordinates ------------------------------------------------------

    def to_idx(self, x: int, y: int) -> int:
        return y * self.width + x

    def to_xy(self, idx: int) -> tuple[int, int]:
        return idx % self.width, idx // self.width

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, idx: int) -> bool:
        return bool(self.walls[idx])

    def move_target(self, idx: int, direction: str) -> int | None:
        """Destination tile for a step, or None when it leaves the grid."""
        return self._move_targets[idx].get(direction)

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def digest(self) -> str:
        return self._digest

    # -- derived lookups ---------------------------------------------------

    def dist_row(self, target: int) -> list[int]:
        """BFS distances from every tile to ``target`` (walls block)."""
        row = self._dist_rows.get(target)
        if row is None:
            row = bfs_distances(
                self.width, self.height, self.walls, target, self._neighbors
            )
            self._dist_rows[target] = row
        return row

    def distance(self, a: int, b: int) -> int:
        return self.dist_row(b)[a]

    def sight(self, a: int, b: int) -> bool:
        """True when no wall interrupts the segment between tile centers.

        The endpoint tiles themselves are not treated as blockers. Symmetric.
        """
        if a == b:
            return True
        if a > b:
            a, b = b, a
        key = a * self.area + b
        cached = self._los_cache.get(key)
        if cached is None:
            ax, ay = self.to_xy(a)
            bx, by = self.to_xy(b)
            cached = True
            for cx, cy in supercover_cells(ax, ay, bx, by):
                cell = cy * self.width + cx
                if cell != a and cell != b and self.walls[cell]:
                    cached = False
                    break
            self._los_cache[key] = cached
        return cached

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        """Check the structural invariants; raises MapFormatError on failure."""
        if self.walls[self.hero_start] or self.walls[self.exit]:
            raise MapFormatError("hero start and exit must be floor tiles")
        if self.hero_start == self.exit:
            raise MapFormatError("hero start and exit must be distinct")
        seen: dict[int, int] = {}
        for pos in (*self.treasures, *self.potions):
            if self.walls[pos]:
                raise MapFormatError("item placed on a wall tile")
            seen[pos] = seen.get(pos, 0) + 1
        for pos in self.portals:
            if self.walls[pos]:
                raise MapFormatError("portal placed on a wall tile")
            seen[pos] = seen.get(pos, 0) + 1
        if any(count > 1 for count in seen.values()):
            raise MapFormatError("more than one non-trap item on a tile")
        for pos in self.traps:
            if self.walls[pos]:
                raise MapFormatError("trap placed on a wall tile")
        for pos, twin in self.portals.items():
            if self.portals.get(twin) != pos:
                raise UnpairedPortalError("portal link is not symmetric")
        for _, pos in self.monsters:
            if self.walls[pos]:
                raise MapFormatError("monster placed on a wall tile")


def load_map(text: str, name: str = "map") -> Level:
    """Parse a map document into a validated Level."""
    rows = [line for line in text.splitlines() if line.strip() != ""]
    if not rows:
        raise MapFormatError("empty map document")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise NonRectangularError("rows have differing lengths")
    height = len(rows)

    walls = bytearray(width * height)
    hero_start: int | None = None
    exit_pos: int | None = None
    treasures: set[int] = set()
    potions: set[int] = set()
    traps: set[int] = set()
    portal_tiles: dict[str, list[int]] = {}
    monsters: list[tuple[MonsterKind, int]] = []

    for y, row in enumerate(rows):
        for x, glyph in enumerate(row):
            idx = y * width + x
            if glyph == "#":
                walls[idx] = 1
            elif glyph == ".":
                pass
            elif glyph == "@":
                if hero_start is not None:
                    raise MapFormatError("more than one hero start")
                hero_start = idx
            elif glyph == "S":
                if exit_pos is not None:
                    raise MapFormatError("more than one exit")
                exit_pos = idx
            elif glyph == "$":
                treasures.add(idx)
            elif glyph == "+":
                potions.add(idx)
            elif glyph == "^":
                traps.add(idx)
            elif glyph.isdigit():
                portal_tiles.setdefault(glyph, []).append(idx)
            elif glyph in MONSTER_GLYPHS:
                monsters.append((MONSTER_GLYPHS[glyph], idx))
            else:
                raise UnknownGlyphError(f"unknown glyph {glyph!r} at ({x}, {y})")

    if hero_start is None:
        raise MissingHeroError("no hero start ('@') tile")
    if exit_pos is None:
        raise MissingExitError("no exit ('S') tile")

    portals: dict[int, int] = {}
    for digit, tiles in sorted(portal_tiles.items()):
        if len(tiles) != 2:
            raise UnpairedPortalError(
                f"portal digit {digit!r} appears {len(tiles)} times, expected 2"
            )
        a, b = tiles
        portals[a] = b
        portals[b] = a

    level = Level(
        name=name,
        width=width,
        height=height,
        walls=bytes(walls),
        hero_start=hero_start,
        exit=exit_pos,
        treasures=frozenset(treasures),
        potions=frozenset(potions),
        traps=frozenset(traps),
        portals=portals,
        monsters=tuple(monsters),
        text="\n".join(rows),
    )
    level.validate()
    return level

"""Turn resolution: legal actions, action application, monster policies.

Resolution order inside one turn: the hero acts first (with all collisions,
pickups, and portal hops), then every monster acts once in row-major order
of their positions at the start of the monster phase, then the turn ends.
A monster removed earlier in the phase does not act. Once the hero has won
or died the rest of the turn is skipped.

Combat rules the map format cannot express are pinned here:

* The hero stepping into a living monster is melee: the monster takes 1
  damage and the hero simultaneously takes the monster's collision damage;
  the hero only enters the tile if the monster died from that hit.
* A monster stepping into the hero deals its collision damage and stays put.
* Wizards deal no collision damage and never step onto the hero's tile.
  Their spell (sight and Euclidean distance <= 5) has no mechanic event of
  its own.
* A stunned minitaur is passable for the hero, deals no contact damage, and
  skips exactly five monster phases. Any damage source re-stuns it.
* Monsters never share a tile; the only exception is a blob stepping onto
  another blob, which merges them. Merging or drinking a potion sets the
  blob's level to min(3, level + 1) (merge: max of the pair + 1) and refills
  its hp to the new level.
* Traps hurt anything that steps on them and never wear out. Portals
  teleport only the hero; effects on the twin tile do not trigger on arrival.
"""
from __future__ import annotations

from ..errors import IllegalActionError, TerminalStateError
from .events import Mechanic, MechanicEvent
from .level import Level, MonsterKind
from .state import (
    BLOB_MAX_LEVEL,
    HERO_MAX_HP,
    MINITAUR_STUN_TURNS,
    Action,
    GameState,
    Monster,
    Move,
    Outcome,
    ThrowJavelin,
)

HIT_EVENT = {
    MonsterKind.GOBLIN: Mechanic.GOBLIN_HIT,
    MonsterKind.GOBLIN_WIZARD: Mechanic.GOBLIN_WIZARD_HIT,
    MonsterKind.BLOB: Mechanic.BLOB_HIT,
    MonsterKind.OGRE: Mechanic.OGRE_HIT,
    MonsterKind.MINITAUR: Mechanic.MINITAUR_HIT,
}

WIZARD_SPELL_RANGE = 5  # Euclidean tile distance


def collision_damage(monster: Monster) -> int:
    kind = monster.kind
    if kind == MonsterKind.GOBLIN:
        return 1
    if kind == MonsterKind.GOBLIN_WIZARD:
        return 0
    if kind == MonsterKind.BLOB:
        return monster.level
    if kind == MonsterKind.OGRE:
        return 2
    return 0 if monster.stun > 0 else 1  # minitaur


def line_of_sight(state: GameState, a: int, b: int) -> bool:
    """Walls are the only sight blockers; monsters and items are transparent."""
    return state.level.sight(a, b)


def is_terminal(state: GameState) -> Outcome:
    return state.outcome


def legal_actions(state: GameState) -> list[Action]:
    """Moves in N,S,E,W order, then javelin throws by target in row-major order."""
    if state.outcome != Outcome.ONGOING:
        raise TerminalStateError("no actions in a terminal state")
    cached = state._legal
    if cached is not None:
        return list(cached)
    level = state.level
    actions: list[Action] = [
        Move(direction) for direction, _ in level._open_moves[state.hero_pos]
    ]
    if state.javelin_ground is None:
        targets = [
            m.pos
            for m in state.monsters
            if m.alive and level.sight(state.hero_pos, m.pos)
        ]
        for pos in sorted(targets):
            actions.append(ThrowJavelin(pos))
    state._legal = actions
    return list(actions)


def apply_action(state: GameState, action: Action) -> tuple[GameState, list[MechanicEvent]]:
    """Resolve one full turn. Pure: the input state is never modified."""
    if state.outcome != Outcome.ONGOING:
        raise IllegalActionError("game already over")
    resolver = _TurnResolver(state)
    resolver.validate(action)
    resolver.hero_phase(action)
    if resolver.outcome == Outcome.ONGOING:
        resolver.monster_phase()
    resolver.end_turn()
    return resolver.freeze(), resolver.events


# Successor memo: rule application is a pure function, so results can be
# shared across planner calls and replays. States are interned by content so
# memo keys stay tiny (int, action) and content-equal states alias the same
# object. Bounded: the tables are dropped wholesale when they grow too large.
_INTERN: dict[tuple, GameState] = {}
_SUCCESSORS: dict[tuple, tuple[GameState, tuple[MechanicEvent, ...]]] = {}
_MEMO_MAX = 1_200_000
_sid_counter = 0


def clear_step_memo() -> None:
    _INTERN.clear()
    _SUCCESSORS.clear()


def intern_state(state: GameState) -> GameState:
    """Return the canonical shared object for this state's content."""
    global _sid_counter
    if state._sid is not None:
        return state
    key = (state.level.digest, state.key())
    found = _INTERN.get(key)
    if found is not None:
        state._sid = found._sid
        return found
    if len(_INTERN) >= _MEMO_MAX:
        clear_step_memo()
    _sid_counter += 1
    state._sid = _sid_counter
    _INTERN[key] = state
    return state


def step(state: GameState, action: Action) -> tuple[GameState, tuple[MechanicEvent, ...]]:
    """Memoized apply_action; returns a shared immutable event tuple."""
    canonical = intern_state(state)
    memo_key = (canonical._sid, action)
    hit = _SUCCESSORS.get(memo_key)
    if hit is None:
        next_state, events = apply_action(canonical, action)
        hit = (intern_state(next_state), tuple(events))
        if len(_SUCCESSORS) >= _MEMO_MAX:
            clear_step_memo()
        _SUCCESSORS[memo_key] = hit
    return hit


class _TurnResolver:
    """Mutable scratch space for resolving a single turn."""

    def __init__(self, state: GameState):
        self.before = state
        self.level: Level = state.level
        self.hero_pos = state.hero_pos
        self.hero_hp = state.hero_hp
        self.score = state.treasure_score
        self.javelin_ground = state.javelin_ground
        self.monsters = list(state.monsters)
        self.treasures = state.treasures
        self.potions = state.potions
        self.ogre_treasures = state.ogre_treasures
        self.turn = state.turn + 1  # events carry the number of the turn they end
        self.outcome = Outcome.ONGOING
        self.events: list[MechanicEvent] = []
        self.occupied: dict[int, int] = {
            m.pos: i for i, m in enumerate(self.monsters) if m.alive
        }

    # -- helpers -----------------------------------------------------------

    def emit(self, kind: Mechanic, subject: int) -> None:
        self.events.append(MechanicEvent(kind, self.turn, subject))

    def living_monster_at(self, pos: int) -> int | None:
        return self.occupied.get(pos)

    def validate(self, action: Action) -> None:
        level = self.level
        if isinstance(action, Move):
            dest = level.move_target(self.hero_pos, action.direction)
            if dest is None or level.walls[dest]:
                raise IllegalActionError(f"cannot move {action.direction}")
        elif isinstance(action, ThrowJavelin):
            if self.javelin_ground is not None:
                raise IllegalActionError("javelin is not held")
            mi = self.living_monster_at(action.target)
            if mi is None:
                raise IllegalActionError("no living monster at throw target")
            if not level.sight(self.hero_pos, action.target):
                raise IllegalActionError("no line of sight to throw target")
        else:
            raise IllegalActionError(f"unknown action {action!r}")

    # -- hero phase ---------------------------------------------------------

    def hero_phase(self, action: Action) -> None:
        if isinstance(action, Move):
            dest = self.level.move_target(self.hero_pos, action.direction)
            mi = self.living_monster_at(dest)
            if mi is not None and not self._passable(self.monsters[mi]):
                died = self.melee_exchange(mi)
                if died and self.hero_hp > 0:
                    self.enter_tile(dest)
            else:
                self.enter_tile(dest)
        else:
            mi = self.living_monster_at(action.target)
            self.hit_monster(mi, via_javelin=True)
            self.javelin_ground = action.target
        if self.hero_hp <= 0:
            self.outcome = Outcome.DEAD
            self.emit(Mechanic.DIE, self.hero_pos)
        elif self.hero_pos == self.level.exit:
            self.outcome = Outcome.WON
            self.emit(Mechanic.REACH_STAIRS, self.hero_pos)

    @staticmethod
    def _passable(monster: Monster) -> bool:
        return monster.kind == MonsterKind.MINITAUR and monster.stun > 0

    def melee_exchange(self, mi: int) -> bool:
        """Hero bumps a monster: 1 damage dealt, collision damage taken.

        Returns True when the monster died from the hit.
        """
        self.hero_hp = max(0, self.hero_hp - collision_damage(self.monsters[mi]))
        return self.hit_monster(mi, via_javelin=False)

    def hit_monster(self, mi: int, via_javelin: bool) -> bool:
        """Apply one point of player/javelin damage; emits hit/kill events."""
        m = self.monsters[mi]
        self.emit(HIT_EVENT[m.kind], m.pos)
        if via_javelin:
            self.emit(Mechanic.JAVELIN_THROW, m.pos)
        if m.kind == MonsterKind.MINITAUR:
            self.monsters[mi] = m._replace(stun=MINITAUR_STUN_TURNS)
            return False
        hp = m.hp - 1
        if hp <= 0:
            self.monsters[mi] = m._replace(hp=0, alive=False)
            del self.occupied[m.pos]
            self.emit(Mechanic.ENEMY_KILL, m.pos)
            return True
        self.monsters[mi] = m._replace(hp=hp)
        return False

    def enter_tile(self, dest: int, via_portal: bool = False) -> None:
        """Move the hero onto a tile and run its effects.

        Arrival through a portal skips the destination tile's own effects
        (only a javelin lying there is still picked up).
        """
        self.hero_pos = dest
        if self.javelin_ground == dest:
            self.javelin_ground = None
        if via_portal:
            return
        if dest in self.treasures:
            self.treasures = self.treasures - {dest}
            self.score += 1
            self.emit(Mechanic.COLLECT_TREASURE, dest)
        elif dest in self.potions:
            self.potions = self.potions - {dest}
            self.hero_hp = min(HERO_MAX_HP, self.hero_hp + 1)
            self.emit(Mechanic.CONSUME_POTION, dest)
        if dest in self.level.traps:
            self.hero_hp = max(0, self.hero_hp - 1)
            self.emit(Mechanic.TRIGGER_TRAP, dest)
            if self.hero_hp <= 0:
                return
        twin = self.level.portals.get(dest)
        if twin is not None:
            self.emit(Mechanic.USE_PORTAL, dest)
            mi = self.living_monster_at(twin)
            if mi is not None and not self._passable(self.monsters[mi]):
                # Something is standing on the far end: collide through it.
                died = self.melee_exchange(mi)
                if died and self.hero_hp > 0:
                    self.enter_tile(twin, via_portal=True)
            else:
                self.enter_tile(twin, via_portal=True)

    # -- monster phase ------------------------------------------------------

    def monster_phase(self) -> None:
        width = self.level.width
        order = sorted(
            (i for i, m in enumerate(self.monsters) if m.alive),
            key=lambda i: self.monsters[i].pos,
        )
        # Flat index order is row-major order because pos = y * width + x.
        del width
        for mi in order:
            if self.outcome != Outcome.ONGOING:
                break
            m = self.monsters[mi]
            if not m.alive:
                continue  # removed earlier this phase (trap death or merge)
            kind = m.kind
            if kind == MonsterKind.GOBLIN:
                self.act_chaser(mi, needs_sight=True)
            elif kind == MonsterKind.GOBLIN_WIZARD:
                self.act_wizard(mi)
            elif kind == MonsterKind.BLOB:
                self.act_collector(mi, self.potions, prefer_item=True)
            elif kind == MonsterKind.OGRE:
                self.act_collector(mi, self.treasures, prefer_item=True)
            else:
                self.act_minitaur(mi)
            if self.hero_hp <= 0:
                self.outcome = Outcome.DEAD
                self.emit(Mechanic.DIE, self.hero_pos)

    def best_step(self, mi: int, target: int, allow_hero: bool, allow_blob: bool) -> int | None:
        """Greedy step strictly reducing BFS distance to the target.

        Candidates are scanned in row-major order, so distance ties resolve
        row-major. Tiles holding other living monsters are blocked, except a
        blob tile when the mover may merge. Returns None to stand still.
        """
        m = self.monsters[mi]
        row = self.level.dist_row(target)
        best = None
        best_d = row[m.pos]
        for cand in self.level._step_candidates[m.pos]:
            if cand == self.hero_pos:
                if not allow_hero:
                    continue
            else:
                occupant = self.occupied.get(cand)
                if occupant is not None and not (
                    allow_blob and self.monsters[occupant].kind == MonsterKind.BLOB
                ):
                    continue
            d = row[cand]
            if d < best_d:
                best, best_d = cand, d
        return best

    def move_monster(self, mi: int, dest: int) -> None:
        """Relocate a monster and apply tile hazards/pickups on arrival."""
        m = self.monsters[mi]
        del self.occupied[m.pos]
        self.occupied[dest] = mi
        self.monsters[mi] = m = m._replace(pos=dest)
        if m.kind == MonsterKind.BLOB and dest in self.potions:
            self.potions = self.potions - {dest}
            level = min(BLOB_MAX_LEVEL, m.level + 1)
            self.monsters[mi] = m = m._replace(level=level, hp=level)
            self.emit(Mechanic.BLOB_POTION, dest)
        elif m.kind == MonsterKind.OGRE and dest in self.treasures:
            self.treasures = self.treasures - {dest}
            self.ogre_treasures += 1
            self.emit(Mechanic.OGRE_TREASURE, dest)
        if dest in self.level.traps:
            self.emit(Mechanic.TRIGGER_TRAP, dest)
            if m.kind == MonsterKind.MINITAUR:
                self.monsters[mi] = m._replace(stun=MINITAUR_STUN_TURNS)
            else:
                hp = m.hp - 1
                alive = hp > 0
                self.monsters[mi] = m._replace(hp=hp, alive=alive)
                if not alive:
                    del self.occupied[dest]

    def act_chaser(self, mi: int, needs_sight: bool) -> None:
        """Goblin policy: approach the hero while in sight, bump for damage."""
        m = self.monsters[mi]
        if needs_sight and not self.level.sight(m.pos, self.hero_pos):
            return
        step = self.best_step(mi, self.hero_pos, allow_hero=True, allow_blob=False)
        if step is None:
            return
        if step == self.hero_pos:
            self.hero_hp = max(0, self.hero_hp - collision_damage(m))
        else:
            self.move_monster(mi, step)

    def act_wizard(self, mi: int) -> None:
        m = self.monsters[mi]
        if not self.level.sight(m.pos, self.hero_pos):
            return
        mx, my = self.level.to_xy(m.pos)
        hx, hy = self.level.to_xy(self.hero_pos)
        if (mx - hx) ** 2 + (my - hy) ** 2 <= WIZARD_SPELL_RANGE**2:
            self.hero_hp = max(0, self.hero_hp - 1)  # spell has no mechanic event
            return
        step = self.best_step(mi, self.hero_pos, allow_hero=False, allow_blob=False)
        if step is not None:
            self.move_monster(mi, step)

    def act_collector(self, mi: int, items: frozenset[int], prefer_item: bool) -> None:
        """Blob/ogre policy: chase the closest of (its item kind, the hero)."""
        m = self.monsters[mi]
        candidates: list[tuple[int, int, int]] = []  # (distance, priority, pos)
        for pos in items:
            if self.level.sight(m.pos, pos):
                candidates.append((self.level.dist_row(pos)[m.pos], 0, pos))
        if self.level.sight(m.pos, self.hero_pos):
            hero_priority = 1 if prefer_item else 0
            candidates.append(
                (self.level.dist_row(self.hero_pos)[m.pos], hero_priority, self.hero_pos)
            )
        if not candidates:
            return
        _, _, target = min(candidates)
        is_blob = m.kind == MonsterKind.BLOB
        step = self.best_step(mi, target, allow_hero=True, allow_blob=is_blob)
        if step is None:
            return
        if step == self.hero_pos:
            self.hero_hp = max(0, self.hero_hp - collision_damage(m))
            return
        other = self.living_monster_at(step)
        if other is not None:  # blob-into-blob merge
            target_blob = self.monsters[other]
            level = min(BLOB_MAX_LEVEL, max(m.level, target_blob.level) + 1)
            self.monsters[other] = target_blob._replace(level=level, hp=level)
            self.monsters[mi] = m._replace(alive=False)
            del self.occupied[m.pos]
            self.emit(Mechanic.BLOB_COMBINE, step)
            return
        self.move_monster(mi, step)

    def act_minitaur(self, mi: int) -> None:
        m = self.monsters[mi]
        if m.stun > 0:
            self.monsters[mi] = m._replace(stun=m.stun - 1)
            return
        step = self.best_step(mi, self.hero_pos, allow_hero=True, allow_blob=False)
        if step is None:
            return
        if step == self.hero_pos:
            self.hero_hp = max(0, self.hero_hp - collision_damage(m))
        else:
            self.move_monster(mi, step)

    # -- wrap up ------------------------------------------------------------

    def end_turn(self) -> None:
        self.emit(Mechanic.END_TURN, self.hero_pos)

    def freeze(self) -> GameState:
        return GameState(
            level=self.level,
            hero_pos=self.hero_pos,
            hero_hp=self.hero_hp,
            treasure_score=self.score,
            javelin_ground=self.javelin_ground,
            monsters=tuple(self.monsters),
            treasures=self.treasures,
            potions=self.potions,
            ogre_treasures=self.ogre_treasures,
            turn=self.turn,
            outcome=self.outcome,
        )

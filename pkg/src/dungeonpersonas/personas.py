"""Online-planning persona agents.

Each persona rebuilds a bounded best-first search tree from the current
state before every single move and commits only to the root action of the
best node found. Node ordering is f = g + h with persona-specific cost and
heuristic:

* runner:             g = steps from the planning root, h = distance to exit
* monster_killer:     g = c * alive killable monsters + k * dead,
                      h = distance to nearest killable monster (exit once
                      none are left)
* treasure_collector: same shape with uncollected treasures as targets

Distances are BFS shortest paths over non-wall tiles. The minitaur cannot
be killed, so it never counts as a monster-killer target. Ties break by
lower h, then by generation order (root children are generated in
legal-action order). Node-budget planning is a pure function of its inputs
and results are memoized; wall-clock planning is supported but neither
deterministic nor cached.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from heapq import heappop, heappush

from .engine.level import MonsterKind
from .engine.rules import legal_actions, step
from .engine.state import Action, GameState, Move, Outcome
from .errors import TerminalStateError


class PersonaKind(str, Enum):
    RUNNER = "runner"
    MONSTER_KILLER = "monster_killer"
    TREASURE_COLLECTOR = "treasure_collector"


@dataclass(frozen=True)
class PersonaSpec:
    kind: PersonaKind
    c: float = 45.0
    k: float = 1e9

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.k <= 1000 * self.c:
            raise ValueError("k must dwarf any reachable target count times c")

    @classmethod
    def by_name(cls, name: str, c: float = 45.0, k: float = 1e9) -> "PersonaSpec":
        return cls(PersonaKind(name), c, k)


ALL_PERSONAS = (
    PersonaSpec(PersonaKind.RUNNER),
    PersonaSpec(PersonaKind.TREASURE_COLLECTOR),
    PersonaSpec(PersonaKind.MONSTER_KILLER),
)


@dataclass(frozen=True)
class NodeBudget:
    """Expansion-count budget; the reproducible default."""

    max_expansions: int = 5000

    def __post_init__(self):
        if self.max_expansions <= 0:
            raise ValueError("budget must be positive")

    def key(self) -> tuple:
        return ("nodes", self.max_expansions)


@dataclass(frozen=True)
class WallClock:
    """Seconds-per-move budget; mirrors the live-play setup."""

    seconds: float = 1.0

    def __post_init__(self):
        if self.seconds <= 0:
            raise ValueError("budget must be positive")

    def key(self) -> tuple:
        return ("seconds", self.seconds)


PlanBudget = NodeBudget | WallClock

DEFAULT_BUDGET = NodeBudget(5000)


@dataclass(slots=True)
class SearchNode:
    """One node of the planning tree, pinned to the root move it came from."""

    state: GameState
    steps: int
    first_action: Action
    g: float = 0.0
    h: float = 0.0

    @property
    def f(self) -> float:
        return self.g + self.h


def _killable(state: GameState) -> list[int]:
    return [
        m.pos
        for m in state.monsters
        if m.alive and m.kind != MonsterKind.MINITAUR
    ]


_HEURISTIC_SLOT = {
    PersonaKind.RUNNER: 0,
    PersonaKind.TREASURE_COLLECTOR: 1,
    PersonaKind.MONSTER_KILLER: 2,
}


def persona_heuristic(spec: PersonaSpec, state: GameState) -> float:
    """Distance-to-goal estimate; unreachable targets cost area + 1.

    Cached on the state (one slot per persona kind) since planner calls
    revisit the same states over and over.
    """
    cache = state._heuristics
    if cache is None:
        cache = state._heuristics = [None, None, None]
    slot = _HEURISTIC_SLOT[spec.kind]
    h = cache[slot]
    if h is None:
        row = state.level.dist_row(state.hero_pos)
        h = None
        if spec.kind == PersonaKind.MONSTER_KILLER:
            targets = _killable(state)
            if targets:
                h = float(min(row[pos] for pos in targets))
        elif spec.kind == PersonaKind.TREASURE_COLLECTOR:
            if state.treasures:
                h = float(min(row[pos] for pos in state.treasures))
        if h is None:
            h = float(row[state.level.exit])
        cache[slot] = h
    return h


def persona_cost(spec: PersonaSpec, node: SearchNode) -> float:
    """Path cost of a node under the persona's utility."""
    if spec.kind == PersonaKind.RUNNER:
        return float(node.steps)
    dead = 1 if node.state.outcome == Outcome.DEAD else 0
    if spec.kind == PersonaKind.MONSTER_KILLER:
        count = len(_killable(node.state))
    else:
        count = len(node.state.treasures)
    return spec.c * count + spec.k * dead


def make_node(spec: PersonaSpec, state: GameState, steps: int, first_action: Action) -> SearchNode:
    node = SearchNode(state=state, steps=steps, first_action=first_action)
    node.g = persona_cost(spec, node)
    node.h = persona_heuristic(spec, node.state)
    return node


_PLAN_CACHE: dict[tuple, Action] = {}
_PLAN_CACHE_MAX = 1_000_000


def clear_plan_cache() -> None:
    _PLAN_CACHE.clear()


def _expansion_actions(spec: PersonaSpec, state: GameState) -> list[Action]:
    actions = legal_actions(state)
    if spec.kind == PersonaKind.RUNNER:
        # Throws never shorten the path to the exit; prune them from the tree.
        moves = [a for a in actions if isinstance(a, Move)]
        if moves:
            return moves
    return actions


def plan_next_action(
    state: GameState,
    spec: PersonaSpec,
    budget: PlanBudget = DEFAULT_BUDGET,
    use_cache: bool = True,
) -> Action:
    """Best-first search from ``state``; returns the chosen root action."""
    if state.outcome != Outcome.ONGOING:
        raise TerminalStateError("cannot plan from a terminal state")

    cacheable = use_cache and isinstance(budget, NodeBudget)
    if cacheable:
        cache_key = (
            state.level.digest,
            state.key(),
            spec.kind,
            spec.c,
            spec.k,
            budget.key(),
        )
        hit = _PLAN_CACHE.get(cache_key)
        if hit is not None:
            return hit

    action = _search(state, spec, budget)

    if cacheable:
        if len(_PLAN_CACHE) >= _PLAN_CACHE_MAX:
            _PLAN_CACHE.clear()
        _PLAN_CACHE[cache_key] = action
    return action


def _search(state: GameState, spec: PersonaSpec, budget: PlanBudget) -> Action:
    root_actions = _expansion_actions(spec, state)
    if not root_actions:
        raise TerminalStateError("no legal actions to plan over")

    deadline = None
    max_expansions = None
    if isinstance(budget, NodeBudget):
        max_expansions = budget.max_expansions
    else:
        deadline = time.perf_counter() + budget.seconds

    runner_can_stop_on_win = (
        spec.kind == PersonaKind.RUNNER and not state.level.portals
    )

    heap: list[tuple[float, float, int, SearchNode]] = []
    visited = {state.key()}
    seq = 0
    best_alive: tuple[float, float, int, SearchNode] | None = None
    best_dead: tuple[float, float, int, SearchNode] | None = None

    def offer(node: SearchNode) -> None:
        nonlocal seq, best_alive, best_dead
        entry = (node.f, node.h, seq, node)
        seq += 1
        rank = entry[:3]
        if node.state.outcome == Outcome.DEAD:
            if best_dead is None or rank < best_dead[:3]:
                best_dead = entry
        else:
            if best_alive is None or rank < best_alive[:3]:
                best_alive = entry
        heappush(heap, entry)

    def expand(parent_state: GameState, steps: int, first_action: Action | None) -> None:
        for action in _expansion_actions(spec, parent_state):
            child_state, _ = step(parent_state, action)
            child_key = child_state.key()
            if child_key in visited:
                continue
            visited.add(child_key)
            offer(make_node(spec, child_state, steps, first_action or action))

    expansions = 1  # the root expansion
    expand(state, 1, None)

    while heap:
        if max_expansions is not None and expansions >= max_expansions:
            break
        if deadline is not None and time.perf_counter() >= deadline:
            break
        f, _, _, node = heappop(heap)
        if node.state.outcome == Outcome.WON:
            if f == 0.0 or runner_can_stop_on_win:
                break  # provably no better node can appear; see module notes
            continue
        if node.state.outcome != Outcome.ONGOING:
            continue
        expansions += 1
        expand(node.state, node.steps + 1, node.first_action)

    chosen = best_alive if best_alive is not None else best_dead
    assert chosen is not None
    return chosen[3].first_action


def persona_action_provider(
    spec: PersonaSpec,
    budget: PlanBudget = DEFAULT_BUDGET,
    use_cache: bool = True,
):
    """An action source suitable for episode recording."""

    def provide(state: GameState) -> Action:
        return plan_next_action(state, spec, budget, use_cache=use_cache)

    return provide

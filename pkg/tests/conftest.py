import random

import pytest

from dungeonpersonas.engine import initial_state, legal_actions, load_map
from dungeonpersonas.engine.rules import step
from dungeonpersonas.maps import REFERENCE_MAPS, load_builtin
from dungeonpersonas.trace import TraceSource, record_episode


@pytest.fixture(scope="session")
def reference_levels():
    return {name: load_builtin(name) for name in REFERENCE_MAPS}


def make_level(text: str, name: str = "test"):
    return load_map(text, name=name)


@pytest.fixture
def corridor_level():
    return make_level("@..S", name="corridor")


def random_walk_trace(level, seed: int, max_turns: int = 60):
    """Trace of uniformly random legal actions; deterministic per seed."""
    rng = random.Random(seed)

    def provider(state):
        return rng.choice(legal_actions(state))

    return record_episode(
        level,
        provider,
        max_turns=max_turns,
        source=TraceSource("synthetic", f"random-{seed}"),
    )


def scripted_provider(actions):
    """Yields a fixed action sequence; raises if the episode outlives it."""
    iterator = iter(actions)

    def provider(_state):
        return next(iterator)

    return provider


def run_actions(level, actions):
    """Apply a sequence from the level's start state; returns (states, events)."""
    state = initial_state(level)
    states = [state]
    all_events = []
    for action in actions:
        state, events = step(state, action)
        states.append(state)
        all_events.append(events)
    return states, all_events

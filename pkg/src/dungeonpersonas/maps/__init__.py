"""Bundled maps: five reference levels plus three tutorial levels.

Reference maps follow the study constraints (5-6 monsters, 6-9 treasures,
one straightforward exit route). Four of them split into a clear center
lane for running, a treasure side, and a monster side; ``arena`` is a
single open hall and doubles as the structurally-different held-out map.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..engine.level import Level, load_map
from ..errors import UnknownMapError

REFERENCE_MAPS = ("crossroads", "gauntlet", "vaults", "spires", "arena")
TUTORIAL_MAPS = ("tutorial-1", "tutorial-2", "tutorial-3")
HELD_OUT_MAP = "arena"  # the open layout, unlike the four lane maps


def builtin_map_names() -> tuple[str, ...]:
    return REFERENCE_MAPS + TUTORIAL_MAPS


def map_text(name: str) -> str:
    if name not in builtin_map_names():
        raise UnknownMapError(f"no bundled map named {name!r}")
    return (resources.files(__package__) / f"{name}.txt").read_text(encoding="utf-8")


def load_builtin(name: str) -> Level:
    return load_map(map_text(name), name=name)


def load_reference_maps() -> list[Level]:
    return [load_builtin(name) for name in REFERENCE_MAPS]


def resolve_maps(specs: list[str]) -> list[Level]:
    """Accept bundled names or filesystem paths; 'reference' means all five."""
    levels: list[Level] = []
    for spec in specs:
        if spec == "reference":
            levels.extend(load_reference_maps())
        elif spec in builtin_map_names():
            levels.append(load_builtin(spec))
        else:
            path = Path(spec)
            if not path.exists():
                raise UnknownMapError(f"{spec!r} is neither a bundled map nor a file")
            levels.append(load_map(path.read_text(encoding="utf-8"), name=path.stem))
    return levels

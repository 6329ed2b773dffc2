import pytest

from dungeonpersonas.engine import MonsterKind, load_map
from dungeonpersonas.errors import (
    MapFormatError,
    MissingExitError,
    MissingHeroError,
    NonRectangularError,
    UnknownGlyphError,
    UnpairedPortalError,
)


def test_minimal_one_row_map():
    level = load_map("@.S")
    assert (level.width, level.height) == (3, 1)
    assert level.to_xy(level.hero_start) == (0, 0)
    assert level.to_xy(level.exit) == (2, 0)
    assert not level.treasures and not level.potions and not level.monsters


def test_missing_exit():
    with pytest.raises(MissingExitError):
        load_map("###\n#@#\n###")


def test_missing_hero():
    with pytest.raises(MissingHeroError):
        load_map("###\n#S#\n###")


def test_portal_digits_pair_up():
    level = load_map("@1.1S")
    a = level.to_idx(1, 0)
    b = level.to_idx(3, 0)
    assert level.portals == {a: b, b: a}


def test_unpaired_portal_digit():
    with pytest.raises(UnpairedPortalError):
        load_map("@1.S")
    with pytest.raises(UnpairedPortalError):
        load_map("@111S")


def test_unknown_glyph():
    with pytest.raises(UnknownGlyphError):
        load_map("@?S")


def test_non_rectangular():
    with pytest.raises(NonRectangularError):
        load_map("@..S\n##")


def test_duplicate_hero_or_exit():
    with pytest.raises(MapFormatError):
        load_map("@@S")
    with pytest.raises(MapFormatError):
        load_map("@SS")


def test_empty_document():
    with pytest.raises(MapFormatError):
        load_map("   \n  ")


def test_hero_start_and_exit_distinct_enforced():
    level = load_map("@S")
    assert level.hero_start != level.exit


def test_all_entity_glyphs():
    level = load_map("@gwbom$+^S")
    kinds = [kind for kind, _ in level.monsters]
    assert kinds == [
        MonsterKind.GOBLIN,
        MonsterKind.GOBLIN_WIZARD,
        MonsterKind.BLOB,
        MonsterKind.OGRE,
        MonsterKind.MINITAUR,
    ]
    assert len(level.treasures) == 1
    assert len(level.potions) == 1
    assert len(level.traps) == 1


def test_blank_lines_ignored():
    level = load_map("\n@.S\n\n")
    assert level.height == 1


def test_monster_positions_are_floor():
    level = load_map("@g.S")
    _, pos = level.monsters[0]
    assert not level.is_wall(pos)

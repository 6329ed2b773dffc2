"""Line of sight against a brute-force geometric oracle.

The oracle enumerates every cell whose closed unit square the real segment
between tile centers touches, using exact integer arithmetic (doubled
coordinates), and declares sight blocked when any such cell other than the
endpoints is a wall. The engine's incremental supercover walk must agree on
every pair of tiles.
"""
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from dungeonpersonas.engine import initial_state, load_map
from dungeonpersonas.engine.geometry import supercover_cells
from dungeonpersonas.engine.rules import line_of_sight


def segment_touches_cell(ax, ay, bx, by, cx, cy) -> bool:
    """Exact predicate: does segment (centers of a, b) touch cell (cx, cy)?"""
    Ax, Ay = 2 * ax + 1, 2 * ay + 1
    Bx, By = 2 * bx + 1, 2 * by + 1
    lox, hix = 2 * cx, 2 * cx + 2
    loy, hiy = 2 * cy, 2 * cy + 2
    if max(Ax, Bx) < lox or min(Ax, Bx) > hix:
        return False
    if max(Ay, By) < loy or min(Ay, By) > hiy:
        return False
    dx, dy = Bx - Ax, By - Ay
    corners = ((lox, loy), (hix, loy), (lox, hiy), (hix, hiy))
    sides = [dx * (y - Ay) - dy * (x - Ax) for x, y in corners]
    if all(s > 0 for s in sides) or all(s < 0 for s in sides):
        return False
    return True


def oracle_cells(ax, ay, bx, by):
    cells = set()
    for cx in range(min(ax, bx) - 1, max(ax, bx) + 2):
        for cy in range(min(ay, by) - 1, max(ay, by) + 2):
            if segment_touches_cell(ax, ay, bx, by, cx, cy):
                cells.add((cx, cy))
    return cells


def oracle_sight(level, a, b):
    ax, ay = level.to_xy(a)
    bx, by = level.to_xy(b)
    for cx, cy in oracle_cells(ax, ay, bx, by):
        if (cx, cy) in ((ax, ay), (bx, by)):
            continue
        if level.in_bounds(cx, cy) and level.is_wall(level.to_idx(cx, cy)):
            return False
    return True


def test_straight_corridor_is_clear():
    level = load_map("@..gS")
    state = initial_state(level)
    assert line_of_sight(state, level.hero_start, level.monsters[0][1])


def test_wall_on_segment_blocks():
    level = load_map("@.#.g\n....S")
    state = initial_state(level)
    assert not line_of_sight(state, level.to_idx(0, 0), level.to_idx(4, 0))


def test_walk_matches_oracle_on_5x5_wall_corner():
    level = load_map(
        "@....\n"
        ".#...\n"
        "..#..\n"
        ".....\n"
        "....S"
    )
    state = initial_state(level)
    for a in range(level.area):
        for b in range(level.area):
            assert line_of_sight(state, a, b) == oracle_sight(level, a, b), (
                level.to_xy(a),
                level.to_xy(b),
            )


def test_supercover_walk_equals_oracle_cells():
    rng = random.Random(7)
    for _ in range(300):
        ax, ay = rng.randrange(8), rng.randrange(8)
        bx, by = rng.randrange(8), rng.randrange(8)
        walked = set(supercover_cells(ax, ay, bx, by))
        assert walked == oracle_cells(ax, ay, bx, by), (ax, ay, bx, by)


@settings(max_examples=120, deadline=None)
@given(
    ax=st.integers(0, 6), ay=st.integers(0, 6),
    bx=st.integers(0, 6), by=st.integers(0, 6),
    walls=st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=10),
)
def test_symmetry_and_oracle_agreement(ax, ay, bx, by, walls):
    rows = []
    for y in range(7):
        row = ""
        for x in range(7):
            if (x, y) == (0, 0):
                row += "@"
            elif (x, y) == (6, 6):
                row += "S"
            elif (x, y) in walls:
                row += "#"
            else:
                row += "."
        rows.append(row)
    level = load_map("\n".join(rows))
    state = initial_state(level)
    a = level.to_idx(ax, ay)
    b = level.to_idx(bx, by)
    forward = line_of_sight(state, a, b)
    assert forward == line_of_sight(state, b, a)
    assert forward == oracle_sight(level, a, b)


def test_monsters_and_items_do_not_block():
    level = load_map("@g$+o.wS")
    state = initial_state(level)
    assert line_of_sight(state, level.hero_start, level.exit)

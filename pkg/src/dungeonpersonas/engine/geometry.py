"""Grid geometry: directions, supercover segments, BFS distance fields.

Tiles are addressed either as (x, y) pairs or as flat indices y * width + x.
All distance fields are plain BFS over non-wall tiles with 4-connectivity;
portals are not shortcuts for distance purposes.
"""
from __future__ import annotations

from collections import deque

# Fixed direction order used by legal-action enumeration.
DIRECTIONS = ("N", "S", "E", "W")
DIR_DELTAS = {"N": (0, -1), "S": (0, 1), "E": (1, 0), "W": (-1, 0)}


def supercover_cells(ax: int, ay: int, bx: int, by: int) -> list[tuple[int, int]]:
    """All tiles touched by the segment between the centers of a and b.

    Integer-exact: when the segment passes through a tile corner, both side
    tiles are included as well as the diagonal one.
    """
    cells = [(ax, ay)]
    dx, dy = bx - ax, by - ay
    sx = 1 if dx > 0 else -1 if dx < 0 else 0
    sy = 1 if dy > 0 else -1 if dy < 0 else 0
    adx, ady = abs(dx), abs(dy)
    x, y = ax, ay
    ix = iy = 0  # boundary crossings consumed per axis
    while (x, y) != (bx, by):
        # Next crossing times, cross-multiplied onto a common denominator:
        # t_x = (2*ix + 1) / (2*adx), t_y = (2*iy + 1) / (2*ady).
        tx = (2 * ix + 1) * ady
        ty = (2 * iy + 1) * adx
        if ady == 0 or (adx != 0 and tx < ty):
            x += sx
            ix += 1
        elif adx == 0 or tx > ty:
            y += sy
            iy += 1
        else:  # exact corner crossing
            cells.append((x + sx, y))
            cells.append((x, y + sy))
            x += sx
            y += sy
            ix += 1
            iy += 1
        cells.append((x, y))
    return cells


def bfs_distances(
    width: int,
    height: int,
    walls: bytes,
    target: int,
    neighbors: list[list[int]],
) -> list[int]:
    """Distance from every tile to ``target`` over non-wall tiles.

    Unreachable tiles (and all walls) get the sentinel ``width * height + 1``.
    """
    sentinel = width * height + 1
    dist = [sentinel] * (width * height)
    if walls[target]:
        return dist
    dist[target] = 0
    queue = deque((target,))
    while queue:
        cur = queue.popleft()
        d = dist[cur] + 1
        for nxt in neighbors[cur]:
            if dist[nxt] > d:
                dist[nxt] = d
                queue.append(nxt)
    return dist

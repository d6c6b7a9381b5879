"""Breadth-first search over maze grids.

All distances are step counts on the 4-connected grid.  Cells are passable
unless they are walls; optionally lava cells can be treated as blocked for
the "safe path" checks.
"""

from collections import deque

import numpy as np

from .types import LAVA, MOVE_DELTAS, WALL

__all__ = ["distance_map", "distance", "shortest_path_moves"]


def distance_map(grid: np.ndarray, source: tuple[int, int], avoid_lava: bool = False) -> np.ndarray:
    """int32 grid of BFS distances from source; -1 where unreachable."""
    n = grid.shape[0]
    dist = np.full((n, n), -1, dtype=np.int32)
    sr, sc = source
    if grid[sr, sc] == WALL or (avoid_lava and grid[sr, sc] == LAVA):
        return dist
    dist[sr, sc] = 0
    queue = deque([(sr, sc)])
    while queue:
        r, c = queue.popleft()
        base = dist[r, c] + 1
        for dr, dc in MOVE_DELTAS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < n and 0 <= nc < n):
                continue
            g = grid[nr, nc]
            if g == WALL or (avoid_lava and g == LAVA):
                continue
            if dist[nr, nc] < 0:
                dist[nr, nc] = base
                queue.append((nr, nc))
    return dist


def distance(grid: np.ndarray, source: tuple[int, int], target: tuple[int, int],
             avoid_lava: bool = False) -> int:
    """BFS distance source -> target, or -1 if unreachable."""
    return int(distance_map(grid, source, avoid_lava=avoid_lava)[target])


def shortest_path_moves(grid: np.ndarray, source: tuple[int, int], target: tuple[int, int],
                        avoid_lava: bool = False) -> tuple[int, ...] | None:
    """One canonical shortest move sequence source -> target, or None.

    Ties are broken by walking back from the target and taking the first
    predecessor in canonical move order, so the result is deterministic.
    """
    dist = distance_map(grid, source, avoid_lava=avoid_lava)
    if dist[target] < 0:
        return None
    n = grid.shape[0]
    moves: list[int] = []
    r, c = target
    while (r, c) != tuple(source):
        d = dist[r, c]
        for action, (dr, dc) in enumerate(MOVE_DELTAS):
            # Predecessor sits one step *against* this move's direction.
            pr, pc = r - dr, c - dc
            if 0 <= pr < n and 0 <= pc < n and dist[pr, pc] == d - 1:
                moves.append(action)
                r, c = pr, pc
                break
        else:
            raise AssertionError("broken distance map")
    moves.reverse()
    return tuple(moves)

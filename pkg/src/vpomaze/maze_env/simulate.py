"""Move-sequence simulation and the 4-dimensional reward.

Semantics: a move into a wall or off the grid is a no-op that still
consumes one step of budget.  The episode ends on reaching the exit or on
exhausting the budget; any remaining moves are ignored.  Items are counted
once per distinct cell, and lava counts every distinct lava cell stepped
on (standing still on one does not re-count it).
"""

import numpy as np

from .types import (
    DIAMOND,
    GOLD,
    LAVA,
    MOVE_DELTAS,
    MOVE_NAMES,
    Maze,
    REWARD_DIM,
    Trajectory,
    WALL,
)

__all__ = ["simulate", "reward_vector", "parse_moves", "format_moves"]


def parse_moves(text: str) -> tuple[int, ...]:
    """Parse a whitespace-separated move string; unknown symbols raise."""
    moves = []
    for token in text.split():
        try:
            moves.append(MOVE_NAMES.index(token))
        except ValueError:
            raise ValueError(f"unknown move symbol: {token!r}") from None
    return tuple(moves)


def format_moves(moves) -> str:
    return " ".join(MOVE_NAMES[int(a)] for a in moves)


def simulate(maze: Maze, moves) -> Trajectory:
    """Run moves on the maze; over-budget suffixes are truncated."""
    n = maze.grid.shape[0]
    grid = maze.grid
    r, c = maze.start
    er, ec = maze.exit
    counted = set()
    gold = diamonds = lava = 0
    steps = 0
    visited = [(r, c)]
    used: list[int] = []

    for a in moves:
        a = int(a)
        if not 0 <= a < len(MOVE_DELTAS):
            raise ValueError(f"invalid move code: {a}")
        if steps >= maze.budget or (r, c) == (er, ec):
            break
        dr, dc = MOVE_DELTAS[a]
        nr, nc = r + dr, c + dc
        if 0 <= nr < n and 0 <= nc < n and grid[nr, nc] != WALL:
            r, c = nr, nc
        steps += 1
        used.append(a)
        visited.append((r, c))
        g = grid[r, c]
        if (r, c) not in counted:
            if g == GOLD:
                gold += 1
                counted.add((r, c))
            elif g == DIAMOND:
                diamonds += 1
                counted.add((r, c))
            elif g == LAVA:
                lava += 1
                counted.add((r, c))
        if (r, c) == (er, ec):
            break

    return Trajectory(
        moves=tuple(used),
        visited_cells=tuple(visited),
        reached_exit=(r, c) == (er, ec),
        gold_collected=gold,
        diamonds_collected=diamonds,
        lava_stepped=lava,
        steps_used=steps,
    )


def reward_vector(maze: Maze, traj: Trajectory) -> np.ndarray:
    """(success, gold, diamond, lava-safety) in [0,1]^4; zeros unless the
    exit was reached within budget."""
    r = np.zeros(REWARD_DIM, dtype=np.float64)
    if not traj.reached_exit:
        return r
    r[0] = 1.0
    r[1] = traj.gold_collected / maze.n_gold
    r[2] = traj.diamonds_collected / maze.n_diamond
    r[3] = 1.0 - traj.lava_stepped / maze.n_lava
    return r

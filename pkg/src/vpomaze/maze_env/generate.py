"""Maze generation: randomized Prim carving, cycle injection, item placement.

generate_maze(seed) is a pure function of its seed: a fresh named stream is
derived per maze and the draw order below is fixed.  Any failed check
returns a Rejection instead of a maze; dataset builders scan seeds and keep
accepted mazes, so the per-seed outcome must never change.

Draw order: seed cell, frontier pops, cycle count, cycle picks, endpoint
coin, gold-corner coin, item counts, gold cells, diamond cells, lava cells.
"""

import numpy as np

from .. import streams
from .bfs import distance, distance_map
from .types import (
    BONUS,
    CENTER,
    CORNERS,
    EMPTY,
    EXIT,
    GOLD,
    DIAMOND,
    GenParams,
    LAVA,
    MOVE_DELTAS,
    Maze,
    Rejection,
    START,
    WALL,
)

__all__ = ["generate_maze", "validate_maze", "carve_maze"]

STREAM_MAZE = "maze-gen"


def _neighbors(r: int, c: int, n: int):
    for dr, dc in MOVE_DELTAS:
        nr, nc = r + dr, c + dc
        if 0 <= nr < n and 0 <= nc < n:
            yield nr, nc


def carve_maze(rng: np.random.Generator, n: int) -> np.ndarray:
    """Randomized-Prim wall carving on an all-walls grid.

    Frontier cells are popped uniformly at random (swap-remove) and carved
    iff they have exactly one empty neighbor, so the empty set is a
    spanning tree of itself: connected and acyclic.
    """
    grid = np.full((n, n), WALL, dtype=np.int8)
    seed_cell = int(rng.integers(n * n))
    sr, sc = divmod(seed_cell, n)
    grid[sr, sc] = EMPTY

    frontier: list[tuple[int, int]] = []
    seen = np.zeros((n, n), dtype=bool)
    seen[sr, sc] = True
    for nr, nc in _neighbors(sr, sc, n):
        frontier.append((nr, nc))
        seen[nr, nc] = True

    while frontier:
        i = int(rng.integers(len(frontier)))
        r, c = frontier[i]
        frontier[i] = frontier[-1]
        frontier.pop()
        empty_nbrs = sum(grid[nr, nc] == EMPTY for nr, nc in _neighbors(r, c, n))
        if empty_nbrs != 1:
            continue
        grid[r, c] = EMPTY
        for nr, nc in _neighbors(r, c, n):
            if grid[nr, nc] == WALL and not seen[nr, nc]:
                frontier.append((nr, nc))
                seen[nr, nc] = True
    return grid


def _inject_cycles(rng: np.random.Generator, grid: np.ndarray, n_cycles: int) -> bool:
    """Open n_cycles walls that have >= 2 empty neighbors, one at a time.

    Candidates are recomputed after each removal (opening a wall can make
    its neighbors eligible).  Returns False if candidates run out.
    """
    n = grid.shape[0]
    for _ in range(n_cycles):
        candidates = [
            (r, c)
            for r in range(n)
            for c in range(n)
            if grid[r, c] == WALL
            and sum(grid[nr, nc] == EMPTY for nr, nc in _neighbors(r, c, n)) >= 2
        ]
        if not candidates:
            return False
        r, c = candidates[int(rng.integers(len(candidates)))]
        grid[r, c] = EMPTY
    return True


def _ball_candidates(grid: np.ndarray, center: tuple[int, int], radius: int) -> list[tuple[int, int]]:
    """Empty non-corner cells within Manhattan radius of center, row-major."""
    n = grid.shape[0]
    out = []
    for r in range(n):
        for c in range(n):
            if abs(r - center[0]) + abs(c - center[1]) > radius:
                continue
            if (r, c) in CORNERS:
                continue
            if grid[r, c] == EMPTY:
                out.append((r, c))
    return out


def generate_maze(seed: int, params: GenParams | None = None) -> Maze | Rejection:
    params = params or GenParams()
    n = params.size
    rng = streams.generator(seed, STREAM_MAZE)

    grid = carve_maze(rng, n)
    n_cycles = int(rng.integers(params.cycles_low, params.cycles_high + 1))
    if not _inject_cycles(rng, grid, n_cycles):
        return Rejection(seed, "cycles_exhausted")

    for corner in CORNERS:
        if grid[corner] != EMPTY:
            return Rejection(seed, "blocked_corner")
    if grid[CENTER] != EMPTY:
        return Rejection(seed, "blocked_center")

    # Endpoints on one diagonal, item corners on the other.
    if int(rng.integers(2)) == 0:
        start, exit_ = (0, 0), (n - 1, n - 1)
        free = [(0, n - 1), (n - 1, 0)]
    else:
        start, exit_ = (0, n - 1), (n - 1, 0)
        free = [(0, 0), (n - 1, n - 1)]
    if int(rng.integers(2)) == 0:
        gold_corner, diamond_corner = free[0], free[1]
    else:
        gold_corner, diamond_corner = free[1], free[0]

    grid[start] = START
    grid[exit_] = EXIT
    grid[CENTER] = BONUS

    d_start = distance_map(grid, start)
    d_exit = distance_map(grid, exit_)
    d_gold = int(d_start[gold_corner]) + int(d_exit[gold_corner])
    d_diam = int(d_start[diamond_corner]) + int(d_exit[diamond_corner])
    via_both = (
        int(d_start[gold_corner])
        + distance(grid, gold_corner, diamond_corner)
        + int(d_exit[diamond_corner])
    )
    budget = max(d_gold, d_diam) + params.budget_slack
    if via_both <= budget:
        return Rejection(seed, "via_both_within_budget")

    n_gold = int(rng.integers(params.items_low, params.items_high + 1))
    n_diamond = int(rng.integers(params.items_low, params.items_high + 1))
    n_lava = int(rng.integers(params.items_low, params.items_high + 1))

    for glyph, count, corner, reason in (
        (GOLD, n_gold, gold_corner, "placement_gold"),
        (DIAMOND, n_diamond, diamond_corner, "placement_diamond"),
    ):
        cells = _ball_candidates(grid, corner, params.item_radius)
        if len(cells) < count:
            return Rejection(seed, reason)
        picks = rng.choice(len(cells), size=count, replace=False)
        for i in picks:
            grid[cells[int(i)]] = glyph

    lo, hi = params.interior
    lava_cells = [
        (r, c)
        for r in range(lo, hi + 1)
        for c in range(lo, hi + 1)
        if grid[r, c] == EMPTY
    ]
    if len(lava_cells) < n_lava:
        return Rejection(seed, "placement_lava")
    picks = rng.choice(len(lava_cells), size=n_lava, replace=False)
    for i in picks:
        grid[lava_cells[int(i)]] = LAVA

    safe = distance(grid, start, exit_, avoid_lava=True)
    if safe < 0 or safe > budget:
        return Rejection(seed, "no_safe_path")

    return Maze(
        grid=grid,
        start=start,
        exit=exit_,
        gold_corner=gold_corner,
        diamond_corner=diamond_corner,
        n_gold=n_gold,
        n_diamond=n_diamond,
        n_lava=n_lava,
        budget=budget,
        via_gold=d_gold,
        via_diamond=d_diam,
        via_both=via_both,
        seed=seed,
    )


def validate_maze(maze: Maze, params: GenParams | None = None) -> list[str]:
    """Re-check every structural invariant; returns a list of violations."""
    params = params or GenParams()
    n = params.size
    bad: list[str] = []
    grid = maze.grid

    if grid.shape != (n, n):
        return [f"grid shape {grid.shape}"]

    for pos, glyph, label in (
        (maze.start, START, "start"),
        (maze.exit, EXIT, "exit"),
        (CENTER, BONUS, "bonus"),
    ):
        if grid[pos] != glyph:
            bad.append(f"{label} glyph missing at {pos}")
    if int(np.sum(grid == START)) != 1 or int(np.sum(grid == EXIT)) != 1:
        bad.append("start/exit not unique")
    if int(np.sum(grid == BONUS)) != 1:
        bad.append("bonus not unique")

    endpoint_pairs = ({(0, 0), (n - 1, n - 1)}, {(0, n - 1), (n - 1, 0)})
    if {maze.start, maze.exit} not in endpoint_pairs:
        bad.append(f"endpoints {maze.start}->{maze.exit} not on a diagonal")
    if {maze.gold_corner, maze.diamond_corner} != set(CORNERS) - {maze.start, maze.exit}:
        bad.append("item corners are not the two free corners")

    gold = maze.item_cells(GOLD)
    diam = maze.item_cells(DIAMOND)
    lava = maze.item_cells(LAVA)
    for label, cells, count in (("gold", gold, maze.n_gold),
                                ("diamond", diam, maze.n_diamond),
                                ("lava", lava, maze.n_lava)):
        if len(cells) != count:
            bad.append(f"{label} count {len(cells)} != {count}")
        if not (params.items_low <= count <= params.items_high):
            bad.append(f"{label} count {count} out of range")
    for label, cells, corner in (("gold", gold, maze.gold_corner),
                                 ("diamond", diam, maze.diamond_corner)):
        for cell in cells:
            if abs(cell[0] - corner[0]) + abs(cell[1] - corner[1]) > params.item_radius:
                bad.append(f"{label} at {cell} outside radius of {corner}")
            if cell in CORNERS:
                bad.append(f"{label} on corner {cell}")
    lo, hi = params.interior
    for cell in lava:
        if not (lo <= cell[0] <= hi and lo <= cell[1] <= hi):
            bad.append(f"lava at {cell} outside interior")

    dist = distance_map(grid, maze.start)
    open_cells = np.argwhere(grid != WALL)
    if any(dist[r, c] < 0 for r, c in open_cells):
        bad.append("open cell unreachable from start")

    d_start = distance_map(grid, maze.start)
    d_exit = distance_map(grid, maze.exit)
    vg = int(d_start[maze.gold_corner]) + int(d_exit[maze.gold_corner])
    vd = int(d_start[maze.diamond_corner]) + int(d_exit[maze.diamond_corner])
    vb = (
        int(d_start[maze.gold_corner])
        + distance(grid, maze.gold_corner, maze.diamond_corner)
        + int(d_exit[maze.diamond_corner])
    )
    if vg != maze.via_gold:
        bad.append(f"via_gold {maze.via_gold} != recomputed {vg}")
    if vd != maze.via_diamond:
        bad.append(f"via_diamond {maze.via_diamond} != recomputed {vd}")
    if vb != maze.via_both:
        bad.append(f"via_both {maze.via_both} != recomputed {vb}")
    if maze.budget != max(vg, vd) + params.budget_slack:
        bad.append(f"budget {maze.budget} != max(via)+{params.budget_slack}")
    if not maze.via_both > maze.budget:
        bad.append("via_both does not exceed budget")

    safe = distance(grid, maze.start, maze.exit, avoid_lava=True)
    if safe < 0 or safe > maze.budget:
        bad.append(f"safe path {safe} not within budget {maze.budget}")

    return bad

"""Maze generation, BFS, simulation, and dataset I/O."""

import collections

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpomaze.maze_env import (
    BONUS,
    CORNERS,
    DIAMOND,
    EMPTY,
    EXIT,
    GOLD,
    GenParams,
    LAVA,
    MOVE_DELTAS,
    Maze,
    MazeDataError,
    Rejection,
    SIZE,
    START,
    TEST_SEED_START,
    TRAIN_SEED_START,
    WALL,
    distance,
    distance_map,
    format_moves,
    generate_maze,
    load_maze,
    make_splits,
    parse_ascii,
    parse_moves,
    render_ascii,
    reward_vector,
    save_maze,
    shortest_path_moves,
    simulate,
    validate_maze,
)


def bfs_oracle(maze, src, avoid_lava=False):
    """Independent BFS over (r, c) dict keys (the library uses flat arrays)."""
    blocked = {WALL}
    if avoid_lava:
        blocked.add(LAVA)
    dist = {src: 0}
    queue = collections.deque([src])
    while queue:
        r, c = queue.popleft()
        for dr, dc in MOVE_DELTAS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < SIZE and 0 <= nc < SIZE):
                continue
            if int(maze.grid[nr, nc]) in blocked or (nr, nc) in dist:
                continue
            dist[(nr, nc)] = dist[(r, c)] + 1
            queue.append((nr, nc))
    return dist


def accepted_mazes(count, start_seed=0):
    out = []
    seed = start_seed
    while len(out) < count:
        got = generate_maze(seed)
        if isinstance(got, Maze):
            out.append(got)
        seed += 1
    return out


MAZES = accepted_mazes(40)


class TestGeneration:
    def test_deterministic(self):
        a = generate_maze(MAZES[0].seed)
        b = generate_maze(MAZES[0].seed)
        assert isinstance(a, Maze) and isinstance(b, Maze)
        assert np.array_equal(a.grid, b.grid)
        assert a.budget == b.budget

    def test_rejections_carry_reasons(self):
        reasons = set()
        for seed in range(300):
            got = generate_maze(seed)
            if isinstance(got, Rejection):
                assert got.reason
                reasons.add(got.reason)
        assert reasons, "expected some rejected seeds in 0..299"

    def test_validate_accepts_all(self):
        for maze in MAZES:
            assert validate_maze(maze) == []

    def test_budget_formula(self):
        for maze in MAZES:
            assert maze.budget == max(maze.via_gold, maze.via_diamond) + 7
            assert maze.via_both > maze.budget

    def test_via_distances_match_oracle(self):
        for maze in MAZES[:15]:
            d_start = bfs_oracle(maze, maze.start)
            d_gold = bfs_oracle(maze, maze.gold_corner)
            d_diam = bfs_oracle(maze, maze.diamond_corner)
            assert maze.via_gold == d_start[maze.gold_corner] + d_gold[maze.exit]
            assert maze.via_diamond == d_start[maze.diamond_corner] + d_diam[maze.exit]
            via_both = (d_start[maze.gold_corner]
                        + d_gold[maze.diamond_corner]
                        + d_diam[maze.exit])
            assert maze.via_both == via_both

    def test_distance_map_matches_oracle(self):
        for maze in MAZES[:8]:
            for avoid in (False, True):
                lib = distance_map(maze.grid, maze.start, avoid_lava=avoid)
                ora = bfs_oracle(maze, maze.start, avoid_lava=avoid)
                for r in range(SIZE):
                    for c in range(SIZE):
                        want = ora.get((r, c), -1)
                        # cells standing on lava keep a distance when they are
                        # the source; everywhere else the maps must agree
                        assert lib[r, c] == want or (avoid and (r, c) == maze.start)

    def test_endpoints_and_corners(self):
        for maze in MAZES:
            assert maze.start in CORNERS and maze.exit in CORNERS
            assert maze.grid[maze.start] == START
            assert maze.grid[maze.exit] == EXIT
            assert maze.grid[maze.gold_corner] == EMPTY
            assert maze.grid[maze.diamond_corner] == EMPTY
            assert maze.grid[4, 4] == BONUS
            assert len({maze.start, maze.exit, maze.gold_corner,
                        maze.diamond_corner}) == 4

    def test_item_counts_and_placement(self):
        params = GenParams()
        for maze in MAZES:
            for glyph, n in ((GOLD, maze.n_gold), (DIAMOND, maze.n_diamond),
                             (LAVA, maze.n_lava)):
                cells = maze.item_cells(glyph)
                assert len(cells) == n
                assert params.items_low <= n <= params.items_high
                assert not set(cells) & set(CORNERS)
            lo, hi = params.interior
            for r, c in maze.item_cells(LAVA):
                assert lo <= r <= hi and lo <= c <= hi
            radius = params.item_radius
            for r, c in maze.item_cells(GOLD):
                gr, gc = maze.gold_corner
                assert abs(r - gr) <= radius and abs(c - gc) <= radius
            for r, c in maze.item_cells(DIAMOND):
                dr, dc = maze.diamond_corner
                assert abs(r - dr) <= radius and abs(c - dc) <= radius

    def test_safe_path_within_budget(self):
        for maze in MAZES:
            safe = bfs_oracle(maze, maze.start, avoid_lava=True)
            assert maze.exit in safe
            assert safe[maze.exit] <= maze.budget

    def test_shortest_path_moves_walk(self):
        for maze in MAZES[:10]:
            moves = shortest_path_moves(maze.grid, maze.start, maze.exit,
                                        avoid_lava=True)
            traj = simulate(maze, moves)
            assert traj.reached_exit
            assert traj.lava_stepped == 0
            assert traj.steps_used == len(moves)
            assert traj.steps_used == distance(maze.grid, maze.start, maze.exit,
                                               avoid_lava=True)


def synthetic_maze():
    """Hand-built open grid: S at (0,0), E at (8,8), one of each item."""
    grid = np.full((SIZE, SIZE), EMPTY, dtype=np.int8)
    grid[0, 0] = START
    grid[8, 8] = EXIT
    grid[4, 4] = BONUS
    grid[0, 2] = GOLD
    grid[2, 0] = DIAMOND
    grid[4, 3] = LAVA
    grid[1, 1] = WALL
    return Maze(grid=grid, start=(0, 0), exit=(8, 8), gold_corner=(0, 8),
                diamond_corner=(8, 0), n_gold=1, n_diamond=1, n_lava=1,
                budget=30, via_gold=16, via_diamond=16, via_both=32, seed=None)


class TestSimulate:
    def test_blocked_move_consumes_step(self):
        maze = synthetic_maze()
        traj = simulate(maze, parse_moves("UP UP"))
        assert traj.steps_used == 2
        assert traj.visited_cells == ((0, 0), (0, 0), (0, 0))

    def test_wall_blocks(self):
        maze = synthetic_maze()
        # (1,1) is a wall: DOWN then RIGHT leaves us stuck at (1,0)
        traj = simulate(maze, parse_moves("DOWN RIGHT"))
        assert traj.visited_cells[-1] == (1, 0)

    def test_distinct_cell_counting(self):
        maze = synthetic_maze()
        # touch the gold cell twice, then run to the exit
        moves = "RIGHT RIGHT LEFT RIGHT " + "RIGHT " * 6 + "DOWN " * 8
        traj = simulate(maze, parse_moves(moves))
        assert traj.reached_exit
        assert traj.gold_collected == 1

    def test_budget_truncation(self):
        maze = synthetic_maze()
        moves = parse_moves("UP " * 40)
        traj = simulate(maze, moves)
        assert traj.steps_used == maze.budget
        assert len(traj.moves) == maze.budget
        assert not traj.reached_exit

    def test_moves_after_exit_ignored(self):
        maze = synthetic_maze()
        moves = parse_moves("RIGHT " * 8 + "DOWN " * 8 + "UP UP")
        traj = simulate(maze, moves)
        assert traj.reached_exit
        assert traj.steps_used == 16

    def test_reward_gating(self):
        maze = synthetic_maze()
        short = simulate(maze, parse_moves("RIGHT RIGHT"))
        assert not short.reached_exit
        assert np.array_equal(reward_vector(maze, short), np.zeros(4))
        full = simulate(maze, parse_moves("RIGHT " * 8 + "DOWN " * 8))
        r = reward_vector(maze, full)
        assert r[0] == 1.0 and r[1] == 1.0  # picked up the (0,2) gold en route
        assert r[2] == 0.0 and r[3] == 1.0

    def test_lava_counted_once(self):
        maze = synthetic_maze()
        # down to row 4, onto the lava cell, wiggle off and back onto it
        moves = "DOWN DOWN DOWN DOWN RIGHT RIGHT RIGHT LEFT RIGHT " \
                + "RIGHT " * 5 + "DOWN " * 4
        traj = simulate(maze, parse_moves(moves))
        assert traj.reached_exit
        assert traj.lava_stepped == 1
        assert reward_vector(maze, traj)[3] == 0.0

    def test_parse_moves_rejects_junk(self):
        with pytest.raises(ValueError, match="unknown move symbol"):
            parse_moves("UP NORTH")

    @given(st.lists(st.integers(0, 3), max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_simulation_invariants(self, moves):
        maze = MAZES[0]
        traj = simulate(maze, moves)
        assert traj.steps_used <= maze.budget
        assert len(traj.visited_cells) == traj.steps_used + 1
        r = reward_vector(maze, traj)
        assert r.shape == (4,)
        assert ((0 <= r) & (r <= 1)).all()
        if not traj.reached_exit:
            assert not r.any()

    @given(st.lists(st.integers(0, 3), max_size=30))
    @settings(max_examples=40, deadline=None)
    def test_move_string_round_trip(self, moves):
        assert list(parse_moves(format_moves(moves))) == moves


class TestIO:
    def test_render_parse_round_trip(self):
        for maze in MAZES[:10]:
            text = render_ascii(maze)
            back = parse_ascii(text)
            assert np.array_equal(back.grid, maze.grid)
            assert back.budget == maze.budget
            assert back.seed == maze.seed
            assert back.gold_corner == maze.gold_corner

    def test_save_load(self, tmp_path):
        path = str(tmp_path / "m.maze")
        save_maze(MAZES[0], path)
        back = load_maze(path)
        assert np.array_equal(back.grid, MAZES[0].grid)

    def test_parse_rejects_bad_grid(self):
        text = render_ascii(MAZES[0])
        with pytest.raises(MazeDataError):
            parse_ascii(text.replace(".", "?", 1))

    def test_parse_rejects_count_mismatch(self):
        maze = MAZES[0]
        text = render_ascii(maze)
        grid, sidecar = text.split("\n\n", 1)
        grid = grid.replace("G", ".", 1)  # drop one gold without updating counts
        with pytest.raises(MazeDataError, match="gold"):
            parse_ascii(grid + "\n\n" + sidecar)

    def test_parse_rejects_truncation(self):
        text = render_ascii(MAZES[0])
        with pytest.raises(MazeDataError):
            parse_ascii(text[: len(text) // 2])

    def test_make_splits_disjoint(self):
        train, test = make_splits(12, 5)
        assert len(train) == 12 and len(test) == 5
        assert all(m.seed < TEST_SEED_START for m in train)
        assert all(m.seed >= TEST_SEED_START for m in test)
        assert all(m.seed >= TRAIN_SEED_START for m in train)
        grids = {m.grid_text() for m in [*train, *test]}
        assert len(grids) == 17

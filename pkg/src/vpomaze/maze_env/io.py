"""Maze (de)serialization and dataset split construction.

One maze per file: nine ASCII grid rows, a blank line, then a JSON sidecar
holding the metadata that cannot be recovered from glyphs alone.  Splits
live in train/NNNN.maze and test/NNNN.maze under a dataset directory.
"""

import json
import os
from dataclasses import asdict

import numpy as np

from .generate import generate_maze, validate_maze
from .types import (
    CHAR_GLYPHS,
    DIAMOND,
    GOLD,
    GenParams,
    LAVA,
    Maze,
    Rejection,
    SIZE,
)

__all__ = [
    "MazeDataError",
    "render_ascii",
    "parse_ascii",
    "save_maze",
    "load_maze",
    "make_splits",
    "save_split",
    "load_split",
    "TRAIN_SEED_START",
    "TEST_SEED_START",
]

TRAIN_SEED_START = 42
TEST_SEED_START = 4242


class MazeDataError(Exception):
    """Malformed or inconsistent maze data."""


def render_ascii(maze: Maze) -> str:
    sidecar = {
        "seed": maze.seed,
        "budget": maze.budget,
        "via_gold": maze.via_gold,
        "via_diamond": maze.via_diamond,
        "via_both": maze.via_both,
        "counts": {"gold": maze.n_gold, "diamond": maze.n_diamond, "lava": maze.n_lava},
        "corners": {
            "start": list(maze.start),
            "exit": list(maze.exit),
            "gold": list(maze.gold_corner),
            "diamond": list(maze.diamond_corner),
        },
    }
    return maze.grid_text() + "\n\n" + json.dumps(sidecar, sort_keys=True) + "\n"


def parse_ascii(text: str) -> Maze:
    """Inverse of render_ascii; raises MazeDataError on any inconsistency."""
    try:
        grid_part, json_part = text.split("\n\n", 1)
    except ValueError:
        raise MazeDataError("missing blank line between grid and sidecar") from None
    rows = grid_part.splitlines()
    if len(rows) != SIZE or any(len(r) != SIZE for r in rows):
        raise MazeDataError(f"grid is not {SIZE}x{SIZE}")
    grid = np.zeros((SIZE, SIZE), dtype=np.int8)
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            if ch not in CHAR_GLYPHS:
                raise MazeDataError(f"unknown glyph {ch!r} at ({r},{c})")
            grid[r, c] = CHAR_GLYPHS[ch]
    try:
        sidecar = json.loads(json_part)
        counts = sidecar["counts"]
        corners = sidecar["corners"]
        maze = Maze(
            grid=grid,
            start=tuple(corners["start"]),
            exit=tuple(corners["exit"]),
            gold_corner=tuple(corners["gold"]),
            diamond_corner=tuple(corners["diamond"]),
            n_gold=int(counts["gold"]),
            n_diamond=int(counts["diamond"]),
            n_lava=int(counts["lava"]),
            budget=int(sidecar["budget"]),
            via_gold=int(sidecar["via_gold"]),
            via_diamond=int(sidecar["via_diamond"]),
            via_both=int(sidecar["via_both"]),
            seed=None if sidecar["seed"] is None else int(sidecar["seed"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise MazeDataError(f"bad sidecar: {exc}") from None
    for glyph, want, label in ((GOLD, maze.n_gold, "gold"),
                               (DIAMOND, maze.n_diamond, "diamond"),
                               (LAVA, maze.n_lava, "lava")):
        got = int(np.sum(grid == glyph))
        if got != want:
            raise MazeDataError(f"{label} glyph count {got} != sidecar {want}")
    return maze


def save_maze(maze: Maze, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(render_ascii(maze))


def load_maze(path: str) -> Maze:
    try:
        with open(path, encoding="ascii") as fh:
            return parse_ascii(fh.read())
    except OSError as exc:
        raise MazeDataError(f"cannot read maze file {path}: {exc}") from None


def _scan(start_seed: int, count: int, params: GenParams,
          max_attempts: int) -> tuple[list[Maze], int, int]:
    """First `count` accepted mazes scanning seeds upward from start_seed."""
    accepted: list[Maze] = []
    seed = start_seed
    attempts = 0
    while len(accepted) < count:
        if attempts >= max_attempts:
            raise MazeDataError(
                f"maze scan from seed {start_seed} exceeded {max_attempts} attempts "
                f"with {len(accepted)}/{count} accepted"
            )
        result = generate_maze(seed, params)
        if isinstance(result, Maze):
            accepted.append(result)
        seed += 1
        attempts += 1
    return accepted, seed - 1, attempts


def make_splits(train_n: int, test_n: int, params: GenParams | None = None,
                validate: bool = True) -> tuple[list[Maze], list[Maze]]:
    """Scan the train and test seed ranges for the first accepted mazes.

    The two ranges are disjoint by construction as long as the train scan
    stays below the test start seed; both that and grid uniqueness are
    checked explicitly.
    """
    params = params or GenParams()
    cap = max(1000, 50 * (train_n + test_n))
    train, train_last, _ = _scan(TRAIN_SEED_START, train_n, params, cap)
    test, _, _ = _scan(TEST_SEED_START, test_n, params, cap)
    if train_last >= TEST_SEED_START:
        raise MazeDataError(
            f"train seed scan reached {train_last}, overlapping the test range"
        )
    seen: dict[str, int] = {}
    for i, maze in enumerate([*train, *test]):
        key = maze.grid_text()
        if key in seen:
            raise MazeDataError(f"duplicate grid between mazes {seen[key]} and {i}")
        seen[key] = i
    if validate:
        for maze in [*train, *test]:
            bad = validate_maze(maze, params)
            if bad:
                raise MazeDataError(f"seed {maze.seed} failed validation: {bad}")
    return train, test


def save_split(mazes: list[Maze], split_dir: str) -> list[str]:
    os.makedirs(split_dir, exist_ok=True)
    paths = []
    for i, maze in enumerate(mazes):
        path = os.path.join(split_dir, f"{i:04d}.maze")
        save_maze(maze, path)
        paths.append(path)
    return paths


def load_split(data_dir: str, split: str) -> list[Maze]:
    split_dir = os.path.join(data_dir, split)
    if not os.path.isdir(split_dir):
        raise MazeDataError(f"missing split directory: {split_dir}")
    names = sorted(n for n in os.listdir(split_dir) if n.endswith(".maze"))
    if not names:
        raise MazeDataError(f"no .maze files in {split_dir}")
    return [load_maze(os.path.join(split_dir, n)) for n in names]

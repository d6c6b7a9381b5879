"""Maze generation, simulation, reward, and dataset I/O."""

from .bfs import distance, distance_map, shortest_path_moves
from .generate import carve_maze, generate_maze, validate_maze
from .io import (
    MazeDataError,
    TEST_SEED_START,
    TRAIN_SEED_START,
    load_maze,
    load_split,
    make_splits,
    parse_ascii,
    render_ascii,
    save_maze,
    save_split,
)
from .simulate import format_moves, parse_moves, reward_vector, simulate
from .types import (
    ACTION_NAMES,
    BONUS,
    CENTER,
    CORNERS,
    DIAMOND,
    DOWN,
    EMPTY,
    EXIT,
    GLYPH_CHARS,
    GOLD,
    GenParams,
    LAVA,
    LEFT,
    MOVE_DELTAS,
    MOVE_NAMES,
    Maze,
    N_ACTIONS,
    OUT_OF_BOUNDS,
    REWARD_DIM,
    RIGHT,
    Rejection,
    SIZE,
    START,
    STOP,
    Trajectory,
    UP,
    WALL,
)

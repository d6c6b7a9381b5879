"""Core maze data types and glyph constants."""

from dataclasses import dataclass, field

import numpy as np

SIZE = 9
CENTER = (4, 4)
CORNERS = ((0, 0), (0, 8), (8, 0), (8, 8))

# Cell glyph codes.  The window feature one-hot uses these codes directly,
# with OUT_OF_BOUNDS appended as class 8.
EMPTY = 0
WALL = 1
START = 2
EXIT = 3
GOLD = 4
DIAMOND = 5
LAVA = 6
BONUS = 7
OUT_OF_BOUNDS = 8

GLYPH_CHARS = {
    EMPTY: ".",
    WALL: "#",
    START: "S",
    EXIT: "E",
    GOLD: "G",
    DIAMOND: "D",
    LAVA: "L",
    BONUS: "B",
}
CHAR_GLYPHS = {c: g for g, c in GLYPH_CHARS.items()}

# Move actions in canonical order; STOP is a policy action, not a move.
UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
STOP = 4
MOVE_NAMES = ("UP", "DOWN", "LEFT", "RIGHT")
ACTION_NAMES = MOVE_NAMES + ("STOP",)
MOVE_DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))
N_ACTIONS = 5

REWARD_DIM = 4


@dataclass(eq=False)
class Maze:
    """One generated maze with its metadata.

    grid holds glyph codes; walls are the only blocked cells.  budget and
    the via_* distances are stored as generated and re-derivable by BFS.
    """

    grid: np.ndarray
    start: tuple[int, int]
    exit: tuple[int, int]
    gold_corner: tuple[int, int]
    diamond_corner: tuple[int, int]
    n_gold: int
    n_diamond: int
    n_lava: int
    budget: int
    via_gold: int
    via_diamond: int
    via_both: int
    seed: int | None = None

    def item_cells(self, glyph: int) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.grid == glyph)
        return [(int(r), int(c)) for r, c in zip(rows, cols)]

    def grid_text(self) -> str:
        return "\n".join(
            "".join(GLYPH_CHARS[int(g)] for g in row) for row in self.grid
        )


@dataclass
class Trajectory:
    """Result of simulating one move sequence on a maze."""

    moves: tuple[int, ...]
    visited_cells: tuple[tuple[int, int], ...]
    reached_exit: bool
    gold_collected: int
    diamonds_collected: int
    lava_stepped: int
    steps_used: int


@dataclass
class Rejection:
    """A candidate maze that failed a generation check."""

    seed: int
    reason: str


@dataclass
class GenParams:
    """Knobs of the maze generator; defaults match the intended dataset."""

    size: int = SIZE
    cycles_low: int = 18
    cycles_high: int = 28
    items_low: int = 3
    items_high: int = 5
    budget_slack: int = 7
    item_radius: int = 2
    interior: tuple[int, int] = (2, 6)

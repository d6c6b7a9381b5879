"""Per-token feature encoding.

Each policy step sees one fixed-length float64 row with two regions:

dynamic (written every step, offsets fixed):
  [0,81)    position one-hot (r*9+c)
  [81,162)  3x3 window one-hot: 9 cells (row-major around the agent) x 9
            glyph classes (glyph codes, out-of-bounds as class 8);
            collected gold/diamonds render as empty, lava persists
  [162]     remaining budget fraction
  [163,166) collected/stepped item fractions (gold, diamond, lava)

static per answer (copied from a precomputed context row):
  [166,166+m)        answer-index one-hot within the chain
  + (m-1)*d          prior-answer reward summary, answer j's reward in
                     block j (zeros beyond the current index)
  + d                conditioning block (zeros unless goal-conditioned)
  + 1                constant bias

The layout is versioned and hashed; checkpoints refuse to load across a
hash mismatch.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from ..maze_env import EMPTY, DIAMOND, GOLD, Maze, OUT_OF_BOUNDS, REWARD_DIM, SIZE

__all__ = ["FeatureSpec", "OFF_POS", "OFF_WINDOW", "OFF_BUDGET", "OFF_FRACS",
           "DYNAMIC_SLOTS", "static_context_row", "write_dynamic_slots"]

OFF_POS = 0
OFF_WINDOW = 81
OFF_BUDGET = 162
OFF_FRACS = 163
DYNAMIC_SLOTS = 166
WINDOW_CLASSES = 9


@dataclass(frozen=True)
class FeatureSpec:
    """Shape of the feature row for a chain length m and reward dim d."""

    m: int = 1
    d: int = REWARD_DIM
    version: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("chain length m must be >= 1")
        if self.d < 1:
            raise ValueError("reward dim d must be >= 1")

    @property
    def off_answer(self) -> int:
        return DYNAMIC_SLOTS

    @property
    def off_prior(self) -> int:
        return DYNAMIC_SLOTS + self.m

    @property
    def off_goal(self) -> int:
        return self.off_prior + (self.m - 1) * self.d

    @property
    def off_bias(self) -> int:
        return self.off_goal + self.d

    @property
    def length(self) -> int:
        return self.off_bias + 1

    def layout_hash(self) -> str:
        desc = (
            f"v{self.version};m={self.m};d={self.d};pos@{OFF_POS};win@{OFF_WINDOW};"
            f"budget@{OFF_BUDGET};fracs@{OFF_FRACS};answer@{self.off_answer};"
            f"prior@{self.off_prior};goal@{self.off_goal};bias@{self.off_bias};"
            f"len={self.length}"
        )
        return hashlib.blake2s(desc.encode("ascii"), digest_size=16).hexdigest()


def static_context_row(spec: FeatureSpec, answer_index: int,
                       prior_rewards, goal_w=None) -> np.ndarray:
    """Per-answer context row: static slots filled, dynamic slots zero."""
    if not 0 <= answer_index < spec.m:
        raise ValueError(f"answer index {answer_index} out of range for m={spec.m}")
    if len(prior_rewards) != answer_index:
        raise ValueError("need exactly one prior reward per earlier answer")
    row = np.zeros(spec.length, dtype=np.float64)
    row[spec.off_answer + answer_index] = 1.0
    for j, r in enumerate(prior_rewards):
        r = np.asarray(r, dtype=np.float64)
        if r.shape != (spec.d,):
            raise ValueError(f"prior reward {j} has shape {r.shape}, want ({spec.d},)")
        row[spec.off_prior + j * spec.d: spec.off_prior + (j + 1) * spec.d] = r
    if goal_w is not None:
        w = np.asarray(goal_w, dtype=np.float64)
        if w.shape != (spec.d,):
            raise ValueError(f"goal weights have shape {w.shape}, want ({spec.d},)")
        row[spec.off_goal: spec.off_goal + spec.d] = w
    row[spec.off_bias] = 1.0
    return row


def write_dynamic_slots(row: np.ndarray, maze: Maze, r: int, c: int,
                        steps_used: int, gold: int, diamonds: int, lava: int,
                        consumed: np.ndarray) -> None:
    """Reference writer for the dynamic slots (row must be zeroed there).

    consumed is a flat uint8[81] marking item cells already counted.
    """
    grid = maze.grid
    row[OFF_POS + r * SIZE + c] = 1.0
    for wr in (-1, 0, 1):
        for wc in (-1, 0, 1):
            widx = (wr + 1) * 3 + (wc + 1)
            rr, cc = r + wr, c + wc
            if 0 <= rr < SIZE and 0 <= cc < SIZE:
                cls = int(grid[rr, cc])
                if cls in (GOLD, DIAMOND) and consumed[rr * SIZE + cc]:
                    cls = EMPTY
            else:
                cls = OUT_OF_BOUNDS
            row[OFF_WINDOW + widx * WINDOW_CLASSES + cls] = 1.0
    row[OFF_BUDGET] = (maze.budget - steps_used) / maze.budget
    row[OFF_FRACS] = gold / maze.n_gold
    row[OFF_FRACS + 1] = diamonds / maze.n_diamond
    row[OFF_FRACS + 2] = lava / maze.n_lava

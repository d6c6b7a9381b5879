"""Pure-Python rollout kernel, the fallback for the compiled extension.

Mirrors the compiled kernel operation for operation: same feature writes,
same first-max softmax shift, same cumulative-sum sampling scan against a
pre-drawn uniform, scalar libm exp/log/tanh.  Logits use np.dot, which on
contiguous float64 resolves to the same BLAS dot the compiled kernel
calls, so the two lanes agree on the test corpus.
"""

import math

import numpy as np

from ..maze_env import (
    DIAMOND,
    EMPTY,
    GOLD,
    LAVA,
    MOVE_DELTAS,
    N_ACTIONS,
    OUT_OF_BOUNDS,
    SIZE,
    STOP,
    WALL,
)
from .features import DYNAMIC_SLOTS, OFF_BUDGET, OFF_FRACS, OFF_POS, OFF_WINDOW, WINDOW_CLASSES

BACKEND_NAME = "python"


def rollout_answer(grid, start_r, start_c, exit_r, exit_c,
                   n_gold, n_diamond, n_lava, budget,
                   w_in, w_out, b_out, hidden,
                   static_row, temperature, greedy,
                   uniforms, feats_out, actions_out, logps_out, visited_out):
    """Sample (or greedy-decode) one answer; returns the episode summary.

    Writes per-token feature rows, actions, and log-probs into the output
    buffers and visited cell ids (r*9+c) into visited_out.  Returns
    (n_tokens, steps_used, reached_exit, gold, diamonds, lava, n_visited).
    """
    r, c = start_r, start_c
    consumed = np.zeros(SIZE * SIZE, dtype=np.uint8)
    gold = diamonds = lava = 0
    steps = 0
    t = 0
    visited_out[0] = r * SIZE + c
    nv = 1
    hbuf = np.empty(hidden) if hidden else None
    exps = [0.0] * N_ACTIONS

    while steps < budget and not (r == exit_r and c == exit_c):
        row = feats_out[t]
        row[:] = static_row
        row[OFF_POS + r * SIZE + c] = 1.0
        for wr in (-1, 0, 1):
            for wc in (-1, 0, 1):
                rr, cc = r + wr, c + wc
                if 0 <= rr < SIZE and 0 <= cc < SIZE:
                    cls = int(grid[rr, cc])
                    if (cls == GOLD or cls == DIAMOND) and consumed[rr * SIZE + cc]:
                        cls = EMPTY
                else:
                    cls = OUT_OF_BOUNDS
                row[OFF_WINDOW + ((wr + 1) * 3 + (wc + 1)) * WINDOW_CLASSES + cls] = 1.0
        row[OFF_BUDGET] = (budget - steps) / budget
        row[OFF_FRACS] = gold / n_gold
        row[OFF_FRACS + 1] = diamonds / n_diamond
        row[OFF_FRACS + 2] = lava / n_lava

        if hidden:
            z1 = np.dot(w_in, row)
            for j in range(hidden):
                hbuf[j] = math.tanh(z1[j])
            logits = np.dot(w_out, hbuf)
            logits = logits + b_out
        else:
            logits = np.dot(w_out, row)

        mx = logits[0]
        for i in range(1, N_ACTIONS):
            if logits[i] > mx:
                mx = logits[i]
        s = 0.0
        for i in range(N_ACTIONS):
            exps[i] = math.exp((logits[i] - mx) / temperature)
            s += exps[i]
        if greedy:
            a = 0
            best = logits[0]
            for i in range(1, N_ACTIONS):
                if logits[i] > best:
                    best = logits[i]
                    a = i
        else:
            target = uniforms[t] * s
            cum = 0.0
            a = N_ACTIONS - 1
            for i in range(N_ACTIONS):
                cum += exps[i]
                if target < cum:
                    a = i
                    break
        logps_out[t] = (logits[a] - mx) / temperature - math.log(s)
        actions_out[t] = a
        t += 1
        if a == STOP:
            break

        dr, dc = MOVE_DELTAS[a]
        nr, nc = r + dr, c + dc
        if 0 <= nr < SIZE and 0 <= nc < SIZE and grid[nr, nc] != WALL:
            r, c = nr, nc
        steps += 1
        visited_out[nv] = r * SIZE + c
        nv += 1
        g = int(grid[r, c])
        if not consumed[r * SIZE + c]:
            if g == GOLD:
                gold += 1
                consumed[r * SIZE + c] = 1
            elif g == DIAMOND:
                diamonds += 1
                consumed[r * SIZE + c] = 1
            elif g == LAVA:
                lava += 1
                consumed[r * SIZE + c] = 1

    reached = r == exit_r and c == exit_c
    return t, steps, reached, gold, diamonds, lava, nv

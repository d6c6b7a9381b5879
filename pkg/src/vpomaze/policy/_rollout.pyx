# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled rollout kernel.

Hot loop of the package: builds the per-token feature row, runs the
linear or tanh-hidden forward pass, samples (or argmaxes) an action, and
steps the maze, all without touching the Python interpreter per token.
Operation order matches the pure-Python fallback exactly; no fast-math,
IEEE semantics preserved.
"""

from libc.math cimport exp, log, tanh
from libc.string cimport memcpy, memset

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"

DEF SIZE = 9
DEF N_ACTIONS = 5
DEF STOP = 4
DEF MAX_HIDDEN = 128

DEF G_EMPTY = 0
DEF G_WALL = 1
DEF G_GOLD = 4
DEF G_DIAMOND = 5
DEF G_LAVA = 6
DEF CLS_OOB = 8

DEF OFF_POS = 0
DEF OFF_WINDOW = 81
DEF OFF_BUDGET = 162
DEF OFF_FRACS = 163
DEF WINDOW_CLASSES = 9

cdef int DR[4]
cdef int DC[4]
DR[0] = -1; DR[1] = 1; DR[2] = 0; DR[3] = 0
DC[0] = 0; DC[1] = 0; DC[2] = -1; DC[3] = 1


cdef inline double _ddot(const double* a, const double* b, Py_ssize_t n) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += a[i] * b[i]
    return s


def rollout_answer(const cnp.int8_t[:, ::1] grid,
                   int start_r, int start_c, int exit_r, int exit_c,
                   int n_gold, int n_diamond, int n_lava, int budget,
                   const double[:, ::1] w_in, const double[:, ::1] w_out,
                   const double[::1] b_out, int hidden,
                   const double[::1] static_row, double temperature, bint greedy,
                   const double[::1] uniforms,
                   double[:, ::1] feats_out,
                   cnp.int8_t[::1] actions_out,
                   double[::1] logps_out,
                   cnp.int16_t[::1] visited_out):
    """Same contract as the fallback: sample one answer into the buffers."""
    cdef int r = start_r, c = start_c
    cdef unsigned char consumed[SIZE * SIZE]
    cdef double logits[N_ACTIONS]
    cdef double exps[N_ACTIONS]
    cdef double hbuf[MAX_HIDDEN]
    cdef int gold = 0, diamonds = 0, lava = 0, steps = 0, t = 0, nv = 1
    cdef int a, i, j, wr, wc, rr, cc, cls, nr, nc, g
    cdef double mx, s, target, cum, z
    cdef Py_ssize_t F = static_row.shape[0]
    cdef double* row
    cdef bint reached

    if hidden > MAX_HIDDEN:
        raise ValueError(f"hidden width {hidden} exceeds kernel cap {MAX_HIDDEN}")

    memset(consumed, 0, SIZE * SIZE)
    visited_out[0] = <cnp.int16_t>(r * SIZE + c)

    with nogil:
        while steps < budget and not (r == exit_r and c == exit_c):
            row = &feats_out[t, 0]
            memcpy(row, &static_row[0], F * sizeof(double))
            row[OFF_POS + r * SIZE + c] = 1.0
            for wr in range(-1, 2):
                for wc in range(-1, 2):
                    rr = r + wr
                    cc = c + wc
                    if 0 <= rr < SIZE and 0 <= cc < SIZE:
                        cls = grid[rr, cc]
                        if (cls == G_GOLD or cls == G_DIAMOND) and consumed[rr * SIZE + cc]:
                            cls = G_EMPTY
                    else:
                        cls = CLS_OOB
                    row[OFF_WINDOW + ((wr + 1) * 3 + (wc + 1)) * WINDOW_CLASSES + cls] = 1.0
            row[OFF_BUDGET] = <double>(budget - steps) / budget
            row[OFF_FRACS] = <double>gold / n_gold
            row[OFF_FRACS + 1] = <double>diamonds / n_diamond
            row[OFF_FRACS + 2] = <double>lava / n_lava

            if hidden:
                for j in range(hidden):
                    z = _ddot(&w_in[j, 0], row, F)
                    hbuf[j] = tanh(z)
                for i in range(N_ACTIONS):
                    logits[i] = _ddot(&w_out[i, 0], hbuf, hidden) + b_out[i]
            else:
                for i in range(N_ACTIONS):
                    logits[i] = _ddot(&w_out[i, 0], row, F)

            mx = logits[0]
            for i in range(1, N_ACTIONS):
                if logits[i] > mx:
                    mx = logits[i]
            s = 0.0
            for i in range(N_ACTIONS):
                exps[i] = exp((logits[i] - mx) / temperature)
                s += exps[i]
            if greedy:
                a = 0
                z = logits[0]
                for i in range(1, N_ACTIONS):
                    if logits[i] > z:
                        z = logits[i]
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
            logps_out[t] = (logits[a] - mx) / temperature - log(s)
            actions_out[t] = <cnp.int8_t>a
            t += 1
            if a == STOP:
                break

            nr = r + DR[a]
            nc = c + DC[a]
            if 0 <= nr < SIZE and 0 <= nc < SIZE and grid[nr, nc] != G_WALL:
                r = nr
                c = nc
            steps += 1
            visited_out[nv] = <cnp.int16_t>(r * SIZE + c)
            nv += 1
            g = grid[r, c]
            if not consumed[r * SIZE + c]:
                if g == G_GOLD:
                    gold += 1
                    consumed[r * SIZE + c] = 1
                elif g == G_DIAMOND:
                    diamonds += 1
                    consumed[r * SIZE + c] = 1
                elif g == G_LAVA:
                    lava += 1
                    consumed[r * SIZE + c] = 1

    reached = r == exit_r and c == exit_c
    return t, steps, bool(reached), gold, diamonds, lava, nv

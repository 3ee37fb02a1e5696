"""Pure-Python twins of the routines in ``_kernels.pyx``.

Arithmetic is done on Python floats in the same order as the compiled
loops, so both backends produce bitwise-identical results.
"""
from __future__ import annotations

import math

import numpy as np


def _lev(a, b) -> int:
    m = len(b)
    row = list(range(m + 1))
    for i in range(1, len(a) + 1):
        diag = row[0]
        row[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            up = row[j]
            best = diag + (0 if ai == b[j - 1] else 1)
            if up + 1 < best:
                best = up + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
            diag = up
    return row[m]


def levenshtein(a, b) -> int:
    return _lev(list(a), list(b))


def levenshtein_many(source, flat, offsets) -> np.ndarray:
    src = list(source)
    flat = list(flat)
    offsets = list(offsets)
    return np.array(
        [_lev(src, flat[offsets[k]:offsets[k + 1]]) for k in range(len(offsets) - 1)],
        dtype=np.int64,
    )


def sgns_epoch(w_in, w_out, centers, contexts, negatives, lr_start, lr_min, step, total_steps):
    win = w_in.tolist()
    wout = w_out.tolist()
    negs = negatives.tolist()
    dim = w_in.shape[1]
    dims = range(dim)
    exp = math.exp
    for c, o, neg in zip(centers.tolist(), contexts.tolist(), negs):
        alpha = lr_start - (lr_start - lr_min) * float(step) / float(total_steps)
        if alpha < lr_min:
            alpha = lr_min
        h = win[c]
        grad = [0.0] * dim
        for s, target in enumerate([o] + neg):
            if s and target == o:
                continue
            label = 1.0 if s == 0 else 0.0
            v = wout[target]
            f = 0.0
            for d in dims:
                f = f + h[d] * v[d]
            g = (label - 1.0 / (1.0 + exp(-f))) * alpha
            for d in dims:
                grad[d] = grad[d] + g * v[d]
            for d in dims:
                v[d] = v[d] + g * h[d]
        for d in dims:
            h[d] = h[d] + grad[d]
        step += 1
    w_in[...] = win
    w_out[...] = wout
    return step

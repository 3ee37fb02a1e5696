# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. ``_pykernels`` mirrors every function here."""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp
from libc.stdlib cimport free, malloc

ctypedef cnp.int64_t i64


cdef i64 _lev(const i64[:] a, Py_ssize_t a0, Py_ssize_t n,
              const i64[:] b, Py_ssize_t b0, Py_ssize_t m, i64* row) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef i64 diag, up, best, cost
    for j in range(m + 1):
        row[j] = j
    for i in range(1, n + 1):
        diag = row[0]
        row[0] = i
        for j in range(1, m + 1):
            up = row[j]
            cost = 0 if a[a0 + i - 1] == b[b0 + j - 1] else 1
            best = diag + cost
            if up + 1 < best:
                best = up + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
            diag = up
    return row[m]


def levenshtein(const i64[:] a, const i64[:] b):
    cdef Py_ssize_t m = b.shape[0]
    cdef i64* row = <i64*> malloc((m + 1) * sizeof(i64))
    if row == NULL:
        raise MemoryError()
    try:
        return _lev(a, 0, a.shape[0], b, 0, m, row)
    finally:
        free(row)


def levenshtein_many(const i64[:] source, const i64[:] flat, const i64[:] offsets):
    """Distance from ``source`` to each sequence ``flat[offsets[k]:offsets[k+1]]``."""
    cdef Py_ssize_t k, count = offsets.shape[0] - 1, longest = 0
    for k in range(count):
        if offsets[k + 1] - offsets[k] > longest:
            longest = offsets[k + 1] - offsets[k]
    out = np.empty(count, dtype=np.int64)
    cdef i64[:] res = out
    cdef i64* row = <i64*> malloc((longest + 1) * sizeof(i64))
    if row == NULL:
        raise MemoryError()
    try:
        with nogil:
            for k in range(count):
                res[k] = _lev(source, 0, source.shape[0],
                              flat, offsets[k], offsets[k + 1] - offsets[k], row)
    finally:
        free(row)
    return out


def sgns_epoch(double[:, ::1] w_in, double[:, ::1] w_out,
               const i64[:] centers, const i64[:] contexts, const i64[:, ::1] negatives,
               double lr_start, double lr_min, i64 step, i64 total_steps):
    """One pass of skip-gram negative-sampling SGD over the given pairs.

    Learning rate decays linearly from ``lr_start`` (step 0) towards
    ``lr_min`` (step ``total_steps``). Negatives equal to the positive
    context are skipped. Returns the next step counter.
    """
    cdef Py_ssize_t p, s, d, dim = w_in.shape[1], npairs = centers.shape[0]
    cdef Py_ssize_t nneg = negatives.shape[1]
    cdef i64 c, o, target
    cdef double alpha, f, g, label
    cdef double* grad = <double*> malloc(dim * sizeof(double))
    if grad == NULL:
        raise MemoryError()
    with nogil:
        for p in range(npairs):
            alpha = lr_start - (lr_start - lr_min) * (<double> step) / (<double> total_steps)
            if alpha < lr_min:
                alpha = lr_min
            c = centers[p]
            o = contexts[p]
            for d in range(dim):
                grad[d] = 0.0
            for s in range(nneg + 1):
                if s == 0:
                    target = o
                    label = 1.0
                else:
                    target = negatives[p, s - 1]
                    if target == o:
                        continue
                    label = 0.0
                f = 0.0
                for d in range(dim):
                    f = f + w_in[c, d] * w_out[target, d]
                g = (label - 1.0 / (1.0 + exp(-f))) * alpha
                for d in range(dim):
                    grad[d] = grad[d] + g * w_out[target, d]
                for d in range(dim):
                    w_out[target, d] = w_out[target, d] + g * w_in[c, d]
            for d in range(dim):
                w_in[c, d] = w_in[c, d] + grad[d]
            step += 1
    free(grad)
    return step
